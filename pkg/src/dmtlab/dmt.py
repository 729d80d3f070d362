"""Closed-form diversity-multiplexing tradeoff curves and the exponent
minimization that generates them.

The central object is the linear program

    minimize  f(alpha) = sum_i (q + l + 1 - 2i) * alpha_i
    over      A0(s) = { 0 <= alpha_1 <= ... <= alpha_l,
                        sum_{i<=j} (1 - alpha_i) <= s for every j }

whose closed-form value dbar(s) and minimizer are implemented next to an
independent brute-force grid oracle.  The real-code bound d1 uses s = 2r and
halves the value; the quaternionic bound d2 uses s = r and doubles it.  All
coefficients are positive only when q >= l, which every channel-derived
instance satisfies (q = Delta + l); the problem constructor enforces it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class PiecewiseLinearCurve:
    """Anchor list (r_i, d_i) evaluated by linear interpolation."""

    anchors: tuple

    def __post_init__(self):
        if len(self.anchors) < 2:
            raise ValueError("need at least 2 anchors")
        rs = [a[0] for a in self.anchors]
        ds = [a[1] for a in self.anchors]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("anchor r values must be strictly increasing")
        if any(b > a + 1e-12 for a, b in zip(ds, ds[1:])):
            raise ValueError("anchor d values must be nonincreasing")
        if abs(ds[-1]) > 1e-12:
            raise ValueError("final anchor must have d = 0")

    @property
    def r_min(self):
        return self.anchors[0][0]

    @property
    def r_max(self):
        return self.anchors[-1][0]

    def __call__(self, r):
        if r < self.r_min - 1e-12 or r > self.r_max + 1e-12:
            raise ValueError(f"r={r} outside the curve domain "
                             f"[{self.r_min}, {self.r_max}]")
        rs = np.array([a[0] for a in self.anchors])
        ds = np.array([a[1] for a in self.anchors])
        return float(np.interp(min(max(r, self.r_min), self.r_max), rs, ds))

    def to_json(self, name):
        return {"curve": name, "anchors": [[float(r), float(d)] for r, d in self.anchors]}


def classical_dmt(n, m):
    """Optimal tradeoff of the unconstrained channel: (k, (m-k)(n-k)) anchors."""
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    anchors = [(float(k), float((m - k) * (n - k))) for k in range(min(m, n) + 1)]
    return PiecewiseLinearCurve(tuple(anchors))


def d1_curve(n, m):
    """Upper bound for real-matrix codes: (r, [(m-r)(n-2r)]+) at half-integer r."""
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    anchors = []
    j = 0
    while True:
        r = j / 2.0
        val = (m - r) * (n - 2 * r)
        anchors.append((r, max(val, 0.0)))
        if val <= 0:
            break
        j += 1
    return PiecewiseLinearCurve(tuple(anchors))


def d2_curve(n, m):
    """Upper bound for quaternionic codes: (r, [(m-r)(n-2r)]+) at integer r."""
    if n % 2:
        raise ValueError("quaternionic bound needs even n")
    if n < 2 or m < 1:
        raise ValueError("need even n >= 2 and m >= 1")
    anchors = []
    r = 0
    while True:
        val = (m - r) * (n - 2 * r)
        anchors.append((float(r), max(float(val), 0.0)))
        if val <= 0:
            break
        r += 1
    return PiecewiseLinearCurve(tuple(anchors))


@dataclass(frozen=True)
class Lemma2Problem:
    """Exponent-minimization instance (q, l, s); q >= l keeps all the
    objective coefficients positive, which the closed form requires."""

    q: float
    l: int
    s: float

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("l must be >= 1")
        if self.q < self.l:
            raise ValueError(f"q={self.q} < l={self.l}: objective coefficients "
                             "would go negative and the infimum diverges")
        if not 0 <= self.s <= self.l:
            raise ValueError(f"s={self.s} outside [0, l={self.l}]")

    def coefficients(self):
        return np.array([self.q + self.l + 1 - 2 * i for i in range(1, self.l + 1)])


def lemma2_closed_form(prob):
    """Closed-form minimum and minimizer of f over A0(s).

    Value: (-q - l + 2*floor(s) + 1)*s + q*l - floor(s)*(floor(s)+1).
    Minimizer: zeros up to index k-1, then k - s, then ones, with
    k = floor(s) + 1 (all zeros when s = l).
    """
    q, l, s = prob.q, prob.l, prob.s
    fs = math.floor(s + 1e-12)
    value = (-q - l + 2 * fs + 1) * s + q * l - fs * (fs + 1)
    alpha = np.zeros(l)
    k = fs + 1
    if k <= l:
        alpha[k - 1] = k - s
        alpha[k:] = 1.0
    return float(value), alpha


@lru_cache(maxsize=8)
def _ascending_grid(l, step):
    """All ascending l-tuples over the [0, 1] grid, with prefix sums of (1-a)."""
    ticks = [i * step for i in range(int(1.0 / step) + 1)]
    if ticks[-1] < 1.0:
        ticks.append(1.0)
    pts = np.array(list(itertools.combinations_with_replacement(ticks, l)))
    prefix = np.cumsum(1.0 - pts, axis=1)
    return pts, prefix


def lemma2_bruteforce(prob, grid_step):
    """Grid-search oracle over A0(s) restricted to the unit box.

    Any feasible coordinate above 1 can be lowered to 1 without losing
    feasibility or increasing f (all coefficients positive for q >= l), so
    the box restriction is exact up to the grid resolution; the result is
    within l*(q+l)*grid_step of the true infimum.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    pts, prefix = _ascending_grid(prob.l, float(grid_step))
    feasible = np.all(prefix <= prob.s + 1e-9, axis=1)
    vals = pts[feasible] @ prob.coefficients()
    return float(vals.min())


def a0_membership(alpha, s, tol=1e-12):
    """True iff alpha is ascending, nonnegative, with all prefix sums of
    (1 - alpha_i) at most s (within tol)."""
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("alpha must be a nonempty 1-D sequence")
    if np.any(a < -tol):
        return False
    if np.any(np.diff(a) < -tol):
        return False
    return bool(np.all(np.cumsum(1.0 - a) <= s + tol))


def delta_k(alpha, s, k):
    """Distance exponent -(1/k) (sum_{i<=k} alpha_i + s - k)."""
    a = np.asarray(alpha, dtype=float)
    if not 1 <= k <= a.size:
        raise ValueError(f"k={k} outside 1..{a.size}")
    return float(-(a[:k].sum() + s - k) / k)


def exponent_real(n, m, r):
    """Real-code outage exponent dbar(2r)/2; equals d1_curve(n, m) at r."""
    l = min(2 * m, n)
    delta = abs(n - 2 * m)
    if not 0 <= 2 * r <= l:
        raise ValueError(f"r={r} outside [0, {l / 2}]")
    value, _ = lemma2_closed_form(Lemma2Problem(q=delta + l, l=l, s=2 * r))
    return value / 2.0


def exponent_quaternion(n, m, r):
    """Quaternionic-code outage exponent 2*dbar(r); equals d2_curve(n, m) at r."""
    if n % 2:
        raise ValueError("quaternionic exponent needs even n")
    p = n // 2
    l = min(m, p)
    delta = abs(p - m)
    if not 0 <= r <= l:
        raise ValueError(f"r={r} outside [0, {l}]")
    value, _ = lemma2_closed_form(Lemma2Problem(q=delta + l, l=l, s=float(r)))
    return 2.0 * value


def laplace_exponent_estimate(coeffs, s, rho_grid, step=0.01, box_hi=2.0):
    """SNR exponent of the integral of rho^(-sum N_i alpha_i) over A0(s).

    Midpoint rule over A0(s) intersected with [0, box_hi]^l (step per
    dimension at most 0.01, l <= 3), then a regression of -log(integral) on
    log(rho).  With three or more grid points a log(log rho) regressor is
    included: the integral carries a polylog-in-rho prefactor whose slope
    bias decays only logarithmically, and modeling it out recovers the
    infimum exponent already at moderate SNR.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    l = coeffs.size
    if l > 3:
        raise ValueError("estimator caps the dimension at l = 3")
    if step > 0.01:
        raise ValueError("midpoint step must be <= 0.01")
    rho_grid = [float(r) for r in rho_grid]
    if len(rho_grid) < 2 or any(b <= a for a, b in zip(rho_grid, rho_grid[1:])):
        raise ValueError("rho_grid must be increasing with >= 2 entries")
    if rho_grid[0] < 1e3:
        raise ValueError("rho_grid entries must be >= 1e3")

    centers = (np.arange(int(round(box_hi / step))) + 0.5) * step

    def log_integral(rho):
        logr = math.log(rho)
        chunks = []
        if l == 1:
            grids = [centers[:, None]]
        elif l == 2:
            a1, a2 = np.meshgrid(centers, centers, indexing="ij")
            grids = [np.stack([a1.ravel(), a2.ravel()], axis=1)]
        else:
            grids = [np.stack([np.full(centers.size ** 2, c),
                               *[g.ravel() for g in np.meshgrid(centers, centers,
                                                                indexing="ij")]], axis=1)
                     for c in centers]
        for g in grids:
            asc = np.all(np.diff(g, axis=1) >= 0, axis=1) if l > 1 else np.ones(len(g), bool)
            mem = asc & np.all(np.cumsum(1.0 - g, axis=1) <= s, axis=1)
            if not np.any(mem):
                continue
            f = g[mem] @ coeffs
            chunks.append(-logr * f)
        if not chunks:
            raise ValueError("integration domain is empty")
        # max-shifted accumulation: rho^(-f) underflows for steep exponents
        vals = np.concatenate(chunks)
        peak = vals.max()
        return peak + math.log(np.exp(vals - peak).sum()) + l * math.log(step)

    x = np.log(np.array(rho_grid))
    y = np.array([-log_integral(r) for r in rho_grid])
    if len(rho_grid) >= 3:
        design = np.stack([x, np.log(x), np.ones_like(x)], axis=1)
        sol, *_ = np.linalg.lstsq(design, y, rcond=None)
        return float(sol[0])
    return float((y[1] - y[0]) / (x[1] - x[0]))


# ---------------------------------------------------------------------------
# Curve export

def curve_family(n, m):
    """The three curves of one antenna configuration (needs even n for d2)."""
    return {"d_star": classical_dmt(n, m), "d1": d1_curve(n, m), "d2": d2_curve(n, m)}


def sample_curves(n, m, step=0.01):
    """Rows (r, d_star, d1, d2) over the common domain [0, min(m, n/2)]."""
    fam = curve_family(n, m)
    r_max = min(c.r_max for c in fam.values())
    count = int(math.floor(r_max / step + 1e-9))
    grid = [i * step for i in range(count + 1)]
    if grid[-1] < r_max - 1e-12:
        grid.append(r_max)
    return [(r, fam["d_star"](r), fam["d1"](r), fam["d2"](r)) for r in grid]
