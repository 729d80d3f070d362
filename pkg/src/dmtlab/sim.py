"""Monte Carlo machinery: Wishart spectra, outage and ML-error estimation,
tail bounds, and log-log slope fits that turn probability sweeps into
empirical diversity estimates.

Determinism: every estimator takes a root generator (or integer seed) and
derives one substream per SNR point and per fixed-size work chunk with
``Generator.spawn``.  Chunk results are summed, so the outcome is
bit-identical regardless of how many worker threads execute the chunks
(``DMTLAB_THREADS`` caps the pool; default is the available parallelism).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .lattice import ResourceLimitError, fixed_codebook, shape_codebook

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class EigenProfile:
    """Nonzero Gram-channel eigenvalues and their SNR exponents.

    lambdas are descending; alphas = -log(lambda)/log(rho) come out
    ascending.  l is the nonzero-eigenvalue count and delta the dimension
    gap of the underlying channel shape.
    """

    lambdas: np.ndarray
    alphas: np.ndarray
    l: int
    delta: int
    rho: float


@dataclass(frozen=True)
class SlopeEstimate:
    """Per-SNR probability estimates plus the fitted log-log slope.

    Points with fewer than the minimum event count are flagged and excluded
    from the fit, never dropped from the record.  slope/stderr are NaN when
    fewer than two points are usable.
    """

    snr_db: tuple
    probs: tuple
    trials: tuple
    events: tuple
    slope: float
    stderr: float
    flagged: tuple


def _as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _worker_count(n_jobs):
    env = os.environ.get("DMTLAB_THREADS", "")
    if env.strip():
        cap = max(1, int(env))
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def _run_chunks(point_rng, trials, chunk, fn):
    """Split `trials` into fixed-size chunks with spawned substreams and sum
    fn(stream, size) over them; the split is independent of the pool size."""
    sizes = [chunk] * (trials // chunk)
    if trials % chunk:
        sizes.append(trials % chunk)
    streams = point_rng.spawn(len(sizes))
    workers = _worker_count(len(sizes))
    if workers == 1:
        return sum(fn(st, sz) for st, sz in zip(streams, sizes))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(fn, streams, sizes))


# ---------------------------------------------------------------------------
# Wishart spectra

def _profile(lambdas, l, delta, rho):
    lam = np.sort(np.asarray(lambdas, dtype=float))[::-1][:l]
    alphas = -np.log(np.maximum(lam, 1e-300)) / math.log(rho)
    lam.flags.writeable = False
    alphas.flags.writeable = False
    return EigenProfile(lambdas=lam, alphas=alphas, l=l, delta=delta, rho=float(rho))


def sample_wishart_real_batch(n, m, count, rng):
    """Spectra of H^T H for `count` stacked-real channels (descending rows)."""
    h = rng.standard_normal((count, 2 * m, n)) * math.sqrt(0.5)
    if n <= 2 * m:
        g = np.einsum("bji,bjk->bik", h, h)
    else:
        g = np.einsum("bij,bkj->bik", h, h)
    lam = np.linalg.eigvalsh(g)
    return lam[:, ::-1]


def sample_wishart_real(n, m, rng, rho=1e4):
    """One draw of the min(2m, n) nonzero eigenvalues of H^T H.

    H is the 2m x n stacked-real channel with N(0, 1/2) entries; rho fixes
    the exponent transform stored on the profile.
    """
    lam = sample_wishart_real_batch(n, m, 1, rng)[0]
    return _profile(lam, min(2 * m, n), abs(n - 2 * m), rho)


def _lift_batch(h1, h2):
    b, m, p = h1.shape
    out = np.empty((b, 2 * m, 2 * p), dtype=complex)
    out[:, :m, :p] = h1
    out[:, :m, p:] = h2
    out[:, m:, :p] = -h2.conj()
    out[:, m:, p:] = h1.conj()
    return out


def sample_wishart_quaternion_batch(p, m, count, rng, pair_tol=1e-8):
    """Distinct spectra of H^dag H for lifted quaternionic channels.

    Returns the min(m, p) distinct values per row (each is a multiplicity-2
    eigenvalue of the 2p x 2p Gram matrix); a pairing gap beyond pair_tol
    relative to the top eigenvalue flags a numerical fault.
    """
    shape = (count, m, p)
    h1 = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)
    h2 = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)
    hq = _lift_batch(h1, h2)
    g = np.einsum("bji,bjk->bik", hq.conj(), hq)
    lam = np.linalg.eigvalsh(g)[:, ::-1]
    l = min(m, p)
    top, bot = lam[:, 0:2 * l:2], lam[:, 1:2 * l:2]
    ref = np.maximum(lam[:, 0], 1e-30)
    if np.any((top - bot) > pair_tol * ref[:, None]):
        raise RuntimeError("quaternionic eigenvalue pairing violated")
    return top


def sample_wishart_quaternion(p, m, rng, rho=1e4):
    """One draw of the min(m, p) distinct eigenvalues of a lifted channel Gram."""
    lam = sample_wishart_quaternion_batch(p, m, 1, rng)[0]
    return _profile(lam, min(m, p), abs(p - m), rho)


# ---------------------------------------------------------------------------
# Eigenvalue densities (unnormalized; constants cancel in ratios)

def log_eigenvalue_density_real(lambdas, n, m):
    """log of e^(-sum lam) * prod lam^((Delta-1)/2) * prod_{i<j}(lam_i - lam_j),
    up to the normalization constant.  -inf when eigenvalues coincide."""
    lam = np.asarray(lambdas, dtype=float)
    delta = abs(n - 2 * m)
    val = -lam.sum() + 0.5 * (delta - 1) * np.log(lam).sum()
    for i in range(lam.size):
        for j in range(i + 1, lam.size):
            gap = lam[i] - lam[j]
            if gap <= 0:
                return -math.inf
            val += math.log(gap)
    return float(val)


def density_ratio_check_real(profile_a, profile_b, n, m):
    """log density(profile_a) - log density(profile_b) under the stacked-real
    eigenvalue law (the unknown constant cancels)."""
    l, delta = min(2 * m, n), abs(n - 2 * m)
    for prof in (profile_a, profile_b):
        if prof.l != l or prof.delta != delta:
            raise ValueError("profile shape does not match (n, m)")
    la = log_eigenvalue_density_real(profile_a.lambdas, n, m)
    lb = log_eigenvalue_density_real(profile_b.lambdas, n, m)
    if la == -math.inf:
        return -math.inf
    if lb == -math.inf:
        return math.inf
    return la - lb


def log_alpha_density_real(alphas, n, m, rho):
    """Exponent-domain density of the stacked-real spectrum (unnormalized)."""
    a = np.asarray(alphas, dtype=float)
    delta = abs(n - 2 * m)
    logr = math.log(rho)
    lam = rho ** (-a)
    val = a.size * math.log(logr) - lam.sum() - logr * 0.5 * (delta + 1) * a.sum()
    for i in range(a.size):
        for j in range(i + 1, a.size):
            gap = lam[i] - lam[j]
            if gap <= 0:
                return -math.inf
            val += math.log(gap)
    return float(val)


def log_alpha_density_upper(alphas, n, m, rho):
    """Dominating exponent-domain density: the Vandermonde factors are
    bounded by rho^(-alpha_i) per pair, giving weights (Delta+2l-2i+1)/2."""
    a = np.asarray(alphas, dtype=float)
    l = a.size
    delta = abs(n - 2 * m)
    logr = math.log(rho)
    weights = np.array([(delta + 2 * l - 2 * (i + 1) + 1) / 2.0 for i in range(l)])
    lam = rho ** (-a)
    return float(l * math.log(logr) - lam.sum() - logr * (weights @ a))


# ---------------------------------------------------------------------------
# Tail bound

def chi2_tail(x, half_dof):
    """P{chi^2(2K) > 2x} = e^(-x) sum_{j<K} x^j / j!.

    Running-term recurrence; switches to log-space accumulation when e^(-x)
    would underflow, so K up to a few hundred stays accurate.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    k = int(half_dof)
    if k < 1:
        raise ValueError("half_dof must be >= 1")
    if x == 0.0:
        return 1.0
    if x <= 700.0:
        term = math.exp(-x)
        total = term
        for j in range(1, k):
            term *= x / j
            total += term
        return min(total, 1.0)
    logs = [-x + j * math.log(x) - math.lgamma(j + 1) for j in range(k)]
    peak = max(logs)
    acc = sum(math.exp(v - peak) for v in logs)
    out = peak + math.log(acc)
    return math.exp(out) if out > -745.0 else 0.0


# ---------------------------------------------------------------------------
# Distance and eigenvalue-product checks

def min_received_distance(h_equiv, cb, rho, n, pair_cap=10_000_000):
    """rho * min over distinct codeword pairs of ||H (X - X')||^2."""
    pts = cb.points
    if len(pts) < 2:
        raise ValueError("need at least 2 codewords")
    if pts[0].shape != (n, n):
        raise ValueError(f"codewords must be {n}x{n}, got {pts[0].shape}")
    n_pairs = len(pts) * (len(pts) - 1) // 2
    if n_pairs > pair_cap:
        raise ResourceLimitError(f"{n_pairs} pairs exceed the cap {pair_cap}")
    h = linalg.as_matrix(h_equiv)
    imgs = np.stack([h @ np.asarray(p, dtype=complex) for p in pts])
    best = math.inf
    for i in range(len(pts) - 1):
        diff = imgs[i + 1:] - imgs[i]
        d2 = np.sum(diff.real ** 2 + diff.imag ** 2, axis=(1, 2))
        best = min(best, float(d2.min()))
    return rho * best


def check_mismatched_bound(h, dx, tol=1e-9):
    """trace(H dX dX^T H^T) >= sum of ascending-mu times descending-lambda.

    lambda are the nonzero eigenvalues of H^T H, mu the eigenvalues of
    dX dX^dag; the product pairs the weakest difference directions with the
    strongest channel directions.
    """
    h = linalg.as_matrix(h)
    dx = linalg.as_matrix(dx)
    hdx = h @ dx
    lhs = float(np.sum(hdx.real ** 2 + hdx.imag ** 2))
    l = min(h.shape)
    lam = np.linalg.eigvalsh(h.conj().T @ h)[::-1][:l]
    mu = np.linalg.eigvalsh(dx @ dx.conj().T)
    rhs = float(np.sum(mu[:l] * lam))
    return lhs >= rhs - tol


@dataclass(frozen=True)
class NvdCheckResult:
    ok: bool
    counterexample: dict | None = None

    def __bool__(self):
        return self.ok


def check_nvd_product_bound(cb, rho, r, n, k_index=None, tol=1e-6):
    """Eigenvalue-product bounds behind the NVD error-exponent argument.

    For every distinct pair of unscaled shell points, with mu the ascending
    eigenvalues of dX dX^dag (distinct values in the quaternionic case,
    where the spectrum is doubled and prod(mu) = |det dX| >= 1):

        prod_{i<=k} mu_i  >=  (4 M^2)^-(n_mu - k)      for each k,
        mu_i             <=  4 M^2                      for each i,

    with M the shell radius.  Each upper factor 4 M^2 comes from
    mu_i <= ||dX||^2 <= (2M)^2; dropping those factors (keeping only the
    rho^(2r/n) scale they carry) is false at finite SNR, so the exact
    constants are kept.  Returns a falsy result with the first offending
    pair when a bound fails.
    """
    lat = cb.source
    pts = [np.asarray(p, dtype=complex) * cb.radius_m for p in cb.points]
    if len(pts) < 2:
        raise ValueError("need at least 2 codewords")
    if lat.ambient_n != n:
        raise ValueError(f"codebook ambient size {lat.ambient_n} != n={n}")
    quat = lat.flavor == "quaternionic"
    msq = rho ** (2.0 * r / n)
    if abs(msq - cb.radius_m ** 2) > 1e-6 * msq:
        raise ValueError("shell radius inconsistent with (rho, r, n): the "
                         "bound presumes an n^2-dimensional shaped codebook")
    cap = 4.0 * msq
    for i in range(len(pts) - 1):
        for j in range(i + 1, len(pts)):
            dx = pts[i] - pts[j]
            mu = np.linalg.eigvalsh(dx @ dx.conj().T)
            mu = np.clip(mu, 0.0, None)
            if quat:
                mu = mu[0::2]
            n_mu = mu.size
            if np.any(mu > cap * (1.0 + tol)):
                return NvdCheckResult(False, {"pair": (i, j), "kind": "upper",
                                              "mu_max": float(mu.max()), "cap": cap})
            ks = range(1, n_mu + 1) if k_index is None else [k_index]
            for k in ks:
                if not 1 <= k <= n_mu:
                    raise ValueError(f"k_index={k} outside 1..{n_mu}")
                prod = float(np.prod(mu[:k]))
                bound = cap ** (-(n_mu - k))
                if prod < bound * (1.0 - tol):
                    return NvdCheckResult(False, {"pair": (i, j), "kind": "lower",
                                                  "k": k, "product": prod,
                                                  "bound": bound})
    return NvdCheckResult(True, None)


# ---------------------------------------------------------------------------
# Slope fitting

def fit_slope(snr_db, probs, trials, min_events=50, weighting="events"):
    """Least squares of -log10(prob) on log10(rho).

    weighting="events" weights each point by its event count (the variance
    of log p-hat scales like 1/events); "uniform" fits unweighted, which
    leans less on the shallow low-SNR region and tracks the asymptotic
    slope better when the sweep is still curving.  Points with zero events
    or fewer than min_events are flagged and left out of the fit; fewer
    than two usable points is an error.
    """
    if weighting not in ("events", "uniform"):
        raise ValueError(f"unknown weighting {weighting!r}")
    snr_db = tuple(float(v) for v in snr_db)
    probs = tuple(float(v) for v in probs)
    trials_t = tuple(int(v) for v in (trials if np.ndim(trials) else [trials] * len(probs)))
    if not len(snr_db) == len(probs) == len(trials_t):
        raise ValueError("snr_db, probs and trials must have equal length")
    events = tuple(int(round(p * t)) for p, t in zip(probs, trials_t))
    flagged = tuple(e < min_events for e in events)
    usable = [i for i, f in enumerate(flagged) if not f]
    if len(usable) < 2:
        raise ValueError(f"fewer than 2 SNR points with >= {min_events} events")
    x = np.array([snr_db[i] / 10.0 for i in usable])
    y = np.array([-math.log10(probs[i]) for i in usable])
    w = (np.array([events[i] for i in usable], dtype=float)
         if weighting == "events" else np.ones(len(usable)))
    wsum = w.sum()
    xb = (w * x).sum() / wsum
    yb = (w * y).sum() / wsum
    sxx = (w * (x - xb) ** 2).sum()
    slope = float((w * (x - xb) * (y - yb)).sum() / sxx)
    intercept = yb - slope * xb
    resid = y - slope * x - intercept
    dof = len(usable) - 2
    sigma2 = float((w * resid ** 2).sum() / dof) if dof > 0 else 0.0
    stderr = math.sqrt(sigma2 / sxx)
    return SlopeEstimate(snr_db=snr_db, probs=probs, trials=trials_t,
                         events=events, slope=slope, stderr=stderr, flagged=flagged)


def _nan_estimate(snr_db, probs, trials, events, min_events):
    return SlopeEstimate(snr_db=tuple(snr_db), probs=tuple(probs),
                         trials=tuple(trials), events=tuple(events),
                         slope=math.nan, stderr=math.nan,
                         flagged=tuple(e < min_events for e in events))


def _finish_estimate(snr_db, probs, trials, events, min_events=50,
                     weighting="events"):
    try:
        return fit_slope(snr_db, probs, trials, min_events=min_events,
                         weighting=weighting)
    except ValueError:
        return _nan_estimate(snr_db, probs, trials, events, min_events)


# ---------------------------------------------------------------------------
# Outage estimation

def _validate_mode_r(mode, cfg):
    if mode == "real":
        l = min(2 * cfg.m, cfg.n)
        if not 0 <= 2 * cfg.r <= l:
            raise ValueError(f"r={cfg.r} outside [0, {l / 2}] for real mode")
    elif mode == "quaternion":
        l = min(cfg.m, cfg.p)
        if not 0 <= cfg.r <= l:
            raise ValueError(f"r={cfg.r} outside [0, {l}] for quaternion mode")
    else:
        raise ValueError(f"mode must be 'real' or 'quaternion', got {mode!r}")


def estimate_outage(mode, cfg, snr_grid_db, trials, rng, chunk=100_000,
                    min_events=50, weighting="events"):
    """Outage probability sweep and its fitted slope.

    Real mode: P{ 0.5 log2 det(I + (rho/n) H H^T) <= r log2 rho } with the
    identity input covariance.  Quaternion mode: P{ 2 sum log2(1 + rho
    lambda_i) <= 2 r log2 rho } over the distinct lifted-Gram eigenvalues.
    """
    _validate_mode_r(mode, cfg)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    root = _as_generator(rng)
    snr_db = [float(v) for v in snr_grid_db]
    streams = root.spawn(len(snr_db))
    n, m = cfg.n, cfg.m
    events = []
    for db, point_rng in zip(snr_db, streams):
        rho = 10.0 ** (db / 10.0)
        if mode == "real":
            thresh = cfg.r * math.log2(rho)

            def count(st, size, rho=rho, thresh=thresh):
                h = st.standard_normal((size, 2 * m, n)) * math.sqrt(0.5)
                g = np.eye(2 * m) + (rho / n) * np.einsum("bij,bkj->bik", h, h)
                _, logdet = np.linalg.slogdet(g)
                return int(np.sum(logdet / (2 * LOG2) <= thresh))
        else:
            p = cfg.p
            thresh = 2 * cfg.r * math.log2(rho)

            def count(st, size, rho=rho, thresh=thresh, p=p):
                lam = sample_wishart_quaternion_batch(p, m, size, st)
                cap = 2.0 * np.sum(np.log2(1.0 + rho * lam), axis=1)
                return int(np.sum(cap <= thresh))

        events.append(_run_chunks(point_rng, int(trials), chunk, count))
    trials_t = [int(trials)] * len(snr_db)
    probs = [e / t for e, t in zip(events, trials_t)]
    return _finish_estimate(snr_db, probs, trials_t, events, min_events, weighting)


# ---------------------------------------------------------------------------
# ML error-rate estimation

def _codebook_array(cb):
    return np.stack([np.asarray(p, dtype=complex) for p in cb.points])


def estimate_error_prob(mode, lat, cfg, snr_grid_db, trials, rng,
                        chunk=50_000, fixed_size=16, noise_scale=1.0,
                        cap=1_000_000, min_events=50, weighting="events"):
    """Block error rate of exhaustive-ML decoding with its fitted slope.

    Per SNR point the codebook is the spherically shaped shell at that SNR,
    except at r = 0 where a fixed `fixed_size`-word constellation is reused
    across the sweep (constant rate).  `trials` may be a scalar or one count
    per SNR point; `noise_scale` = 0 is the noiseless test hook.
    """
    _validate_mode_r(mode, cfg)
    if mode == "real" and lat.flavor != "real":
        raise ValueError("real mode needs a real-flavored lattice")
    if mode == "quaternion" and lat.flavor != "quaternionic":
        raise ValueError("quaternion mode needs a quaternionic lattice")
    snr_db = [float(v) for v in snr_grid_db]
    trials_t = ([int(trials)] * len(snr_db) if np.ndim(trials) == 0
                else [int(t) for t in trials])
    if len(trials_t) != len(snr_db):
        raise ValueError("trials list must match the SNR grid")
    if min(trials_t) < 1:
        raise ValueError("trials must be >= 1")
    root = _as_generator(rng)
    streams = root.spawn(len(snr_db))
    n, m = cfg.n, cfg.m
    fixed_cb = fixed_codebook(lat, fixed_size) if cfg.r == 0 else None
    events = []
    for db, point_rng, n_trials in zip(snr_db, streams, trials_t):
        rho = 10.0 ** (db / 10.0)
        cb = fixed_cb if fixed_cb is not None else shape_codebook(lat, rho, cfg.r, cap=cap)
        cwords = _codebook_array(cb)
        scale = math.sqrt(rho / n)

        if mode == "real":
            creal = cwords.real

            def count(st, size, creal=creal, scale=scale):
                h = st.standard_normal((size, 2 * m, n)) * math.sqrt(0.5)
                w = st.standard_normal((size, 2 * m, n)) * math.sqrt(0.5) * noise_scale
                tx = st.integers(0, len(creal), size=size)
                y = scale * np.einsum("bij,bjk->bik", h, creal[tx]) + w
                cand = scale * np.einsum("bij,kjl->bkil", h, creal)
                dist = np.sum((y[:, None] - cand) ** 2, axis=(-2, -1))
                return int(np.sum(np.argmin(dist, axis=1) != tx))
        else:
            p = cfg.p

            def count(st, size, cwords=cwords, scale=scale, p=p):
                shape = (size, m, p)
                h1 = (st.standard_normal(shape) + 1j * st.standard_normal(shape)) * math.sqrt(0.5)
                h2 = (st.standard_normal(shape) + 1j * st.standard_normal(shape)) * math.sqrt(0.5)
                w1 = (st.standard_normal(shape) + 1j * st.standard_normal(shape)) * math.sqrt(0.5)
                w2 = (st.standard_normal(shape) + 1j * st.standard_normal(shape)) * math.sqrt(0.5)
                hq = _lift_batch(h1, h2)
                wq = _lift_batch(w1, w2) * noise_scale
                tx = st.integers(0, len(cwords), size=size)
                y = scale * np.einsum("bij,bjk->bik", hq, cwords[tx]) + wq
                cand = scale * np.einsum("bij,kjl->bkil", hq, cwords)
                dist = np.sum(np.abs(y[:, None] - cand) ** 2, axis=(-2, -1))
                return int(np.sum(np.argmin(dist, axis=1) != tx))

        events.append(_run_chunks(point_rng, n_trials, chunk, count))
    probs = [e / t for e, t in zip(events, trials_t)]
    return _finish_estimate(snr_db, probs, trials_t, events, min_events, weighting)
