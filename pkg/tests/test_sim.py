import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmtlab import lattice, sim
from dmtlab.channel import SystemConfig, mutual_info_real
from dmtlab.sim import (chi2_tail, check_mismatched_bound,
                        check_nvd_product_bound, density_ratio_check_real,
                        estimate_error_prob, estimate_outage, fit_slope,
                        min_received_distance, sample_wishart_quaternion,
                        sample_wishart_real)


HAMILTON = lattice.build_hamilton_order()
SPLIT = lattice.build_split_order()


# ---------------------------------------------------------------------------
# Wishart samplers

def test_wishart_real_count_and_positivity():
    rng = np.random.default_rng(0)
    for n, m in ((2, 1), (4, 2), (2, 3)):
        prof = sample_wishart_real(n, m, rng)
        assert prof.l == min(2 * m, n)
        assert prof.lambdas.shape == (prof.l,)
        assert np.all(prof.lambdas >= -1e-10)
        assert np.all(np.diff(prof.lambdas) <= 0)
        assert np.all(np.diff(prof.alphas) >= 0)


def test_wishart_real_trace_moment():
    rng = np.random.default_rng(1)
    lam = sim.sample_wishart_real_batch(2, 1, 100_000, rng)
    # E tr(H^T H) = (2m * n) * 1/2 = m*n
    assert lam.sum(axis=1).mean() == pytest.approx(2.0, rel=0.02)


def test_wishart_quaternion_trace_moment():
    rng = np.random.default_rng(2)
    lam = sim.sample_wishart_quaternion_batch(1, 2, 100_000, rng)
    # E tr(H^dag H) of the 2m x 2p lift with unit-variance complex entries
    assert (2.0 * lam.sum(axis=1)).mean() == pytest.approx(8.0, rel=0.02)


def test_wishart_quaternion_pairing_1000():
    rng = np.random.default_rng(3)
    lam = sim.sample_wishart_quaternion_batch(2, 2, 1000, rng)
    assert lam.shape == (1000, 2)


def test_wishart_quaternion_scalar_case():
    # p = m = 1: the single distinct eigenvalue is |h1|^2 + |h2|^2
    seed = 77
    rng = np.random.default_rng(seed)
    prof = sample_wishart_quaternion(1, 1, rng)
    ref = np.random.default_rng(seed)
    h1 = (ref.standard_normal((1, 1, 1)) + 1j * ref.standard_normal((1, 1, 1))) * np.sqrt(0.5)
    h2 = (ref.standard_normal((1, 1, 1)) + 1j * ref.standard_normal((1, 1, 1))) * np.sqrt(0.5)
    expect = abs(h1[0, 0, 0]) ** 2 + abs(h2[0, 0, 0]) ** 2
    assert prof.lambdas[0] == pytest.approx(expect, rel=1e-10)


def test_wishart_alpha_transform():
    rng = np.random.default_rng(4)
    prof = sample_wishart_real(2, 1, rng, rho=1e4)
    assert np.allclose(prof.alphas, -np.log(prof.lambdas) / np.log(1e4), atol=1e-12)
    assert prof.rho == 1e4


# ---------------------------------------------------------------------------
# densities

def test_density_ratio_identical_profiles():
    rng = np.random.default_rng(5)
    prof = sample_wishart_real(2, 1, rng)
    assert density_ratio_check_real(prof, prof, 2, 1) == 0.0


def test_density_ratio_coincident_sentinel():
    bad = sim.EigenProfile(lambdas=np.array([1.0, 1.0]),
                           alphas=np.array([0.0, 0.0]), l=2, delta=0, rho=1e4)
    rng = np.random.default_rng(6)
    good = sample_wishart_real(2, 1, rng)
    assert density_ratio_check_real(bad, good, 2, 1) == -math.inf
    assert density_ratio_check_real(good, bad, 2, 1) == math.inf


def test_density_ratio_shape_mismatch():
    rng = np.random.default_rng(7)
    prof = sample_wishart_real(2, 1, rng)
    with pytest.raises(ValueError):
        density_ratio_check_real(prof, prof, 4, 2)


def test_density_ratio_1d_gamma_histogram():
    # n = 1: the single eigenvalue is Gamma(m, 1); binned log ratios must
    # match the closed-form log density differences within 3 standard errors
    n, m = 1, 2
    rng = np.random.default_rng(8)
    lam = sim.sample_wishart_real_batch(n, m, 1_000_000, rng)[:, 0]
    edges = np.array([0.5, 1.0, 1.5, 2.0, 3.0, 4.0])
    centers = 0.5 * (edges[:-1] + edges[1:])
    counts = np.histogram(lam, bins=edges)[0].astype(float)
    widths = np.diff(edges)
    dens = counts / widths

    def prof_at(x):
        return sim.EigenProfile(lambdas=np.array([x]), alphas=np.array([0.0]),
                                l=1, delta=abs(n - 2 * m), rho=1e4)

    for i in range(len(centers) - 1):
        observed = math.log(dens[i + 1] / dens[i])
        expected = density_ratio_check_real(prof_at(centers[i + 1]), prof_at(centers[i]), n, m)
        se = math.sqrt(1.0 / counts[i + 1] + 1.0 / counts[i])
        # binning bias is second order; allow it alongside the 3-sigma band
        assert abs(observed - expected) <= 3.0 * se + 0.02


def test_alpha_density_domination_10k():
    # unnormalized exponent-domain density never exceeds its bounding form
    n, m, rho = 2, 1, 1e4
    rng = np.random.default_rng(9)
    for _ in range(10_000):
        prof = sample_wishart_real(n, m, rng, rho=rho)
        lo = sim.log_alpha_density_real(prof.alphas, n, m, rho)
        hi = sim.log_alpha_density_upper(prof.alphas, n, m, rho)
        assert lo <= hi + 1e-9


# ---------------------------------------------------------------------------
# chi-square tail

def test_chi2_tail_at_zero():
    assert chi2_tail(0.0, 5) == 1.0


def test_chi2_tail_exponential_case():
    for x in (0.3, 1.0, 4.0):
        assert chi2_tail(x, 1) == pytest.approx(math.exp(-x), rel=1e-12)


def test_chi2_tail_k2_value():
    assert chi2_tail(1.0, 2) == pytest.approx(2.0 / math.e, rel=1e-12)


def test_chi2_tail_matches_known_sum():
    # K = 4, x = 2: e^-2 (1 + 2 + 2 + 4/3)
    assert chi2_tail(2.0, 4) == pytest.approx(math.exp(-2) * (1 + 2 + 2 + 4 / 3), rel=1e-12)


def test_chi2_tail_large_x_no_overflow():
    v = chi2_tail(800.0, 200)
    assert 0.0 <= v < 1e-100


def test_chi2_tail_validation():
    with pytest.raises(ValueError):
        chi2_tail(-1.0, 2)
    with pytest.raises(ValueError):
        chi2_tail(1.0, 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(0.01, 50.0), st.integers(1, 50))
def test_chi2_tail_monotone(x1, x2, k):
    lo, hi = sorted((x1, x2))
    assert chi2_tail(hi, k) <= chi2_tail(lo, k) + 1e-15
    assert chi2_tail(lo, k + 1) >= chi2_tail(lo, k) - 1e-15


# ---------------------------------------------------------------------------
# fit_slope

def test_fit_slope_two_points():
    est = fit_slope([10.0, 20.0], [1e-1, 1e-2], [100_000, 100_000])
    assert est.slope == pytest.approx(1.0, abs=1e-12)
    assert est.stderr == 0.0


def test_fit_slope_collinear():
    est = fit_slope([10.0, 20.0, 30.0], [1e-1, 1e-2, 1e-3], [10**6] * 3)
    assert est.slope == pytest.approx(1.0, abs=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-9)


def test_fit_slope_synthetic_noise():
    rng = np.random.default_rng(10)
    snr = [10.0, 15.0, 20.0, 25.0, 30.0]
    probs = [(10 ** (db / 10)) ** -1.5 * float(rng.uniform(0.95, 1.05)) for db in snr]
    est = fit_slope(snr, probs, [10**9] * 5)
    assert est.slope == pytest.approx(1.5, abs=0.1)


def test_fit_slope_flags_sparse_points():
    est = fit_slope([10.0, 20.0, 30.0], [1e-1, 1e-2, 1e-5], [10**4] * 3)
    assert est.flagged == (False, False, True)
    assert est.slope == pytest.approx(1.0, abs=1e-9)


def test_fit_slope_insufficient_points():
    with pytest.raises(ValueError):
        fit_slope([10.0, 20.0], [1e-1, 0.0], [1000, 1000])


# ---------------------------------------------------------------------------
# distance and eigenvalue-product checks

def test_min_received_distance_zero_channel():
    cb = lattice.fixed_codebook(HAMILTON, 4)
    assert min_received_distance(np.zeros((2, 2)), cb, 10.0, 2) == 0.0


def test_min_received_distance_single_pair():
    class Book:
        points = (np.zeros((2, 2), dtype=complex), np.eye(2, dtype=complex) / np.sqrt(2))

    val = min_received_distance(np.eye(2), Book(), 2.0, 2)
    assert val == pytest.approx(2.0, abs=1e-12)


def test_min_received_distance_homogeneity():
    rng = np.random.default_rng(11)
    cb = lattice.fixed_codebook(HAMILTON, 8)
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    base = min_received_distance(h, cb, 5.0, 2)
    scaled = min_received_distance(3.0 * h, cb, 5.0, 2)
    assert scaled == pytest.approx(9.0 * base, rel=1e-9)


def test_min_received_distance_pair_cap():
    cb = lattice.shape_codebook(HAMILTON, 60.0, 0.6)
    with pytest.raises(lattice.ResourceLimitError):
        min_received_distance(np.eye(2), cb, 5.0, 2, pair_cap=3)


def test_mismatched_bound_zero_difference():
    rng = np.random.default_rng(12)
    h = rng.standard_normal((2, 2))
    assert check_mismatched_bound(h, np.zeros((2, 2)))


def test_mismatched_bound_opposed_diagonals_equality():
    h = np.diag([3.0, 1.0])
    dx = np.diag([1.0, 2.0])
    lhs = float(np.sum((h @ dx) ** 2))
    lam = np.array([9.0, 1.0])
    mu = np.array([1.0, 4.0])
    assert lhs == float(lam @ mu)
    assert check_mismatched_bound(h, dx)


def test_mismatched_bound_random_sweep():
    rng = np.random.default_rng(13)
    for _ in range(1000):
        h = rng.standard_normal((2, 2))
        dx = rng.standard_normal((2, 2))
        assert check_mismatched_bound(h, dx)


def test_nvd_product_bound_split():
    cb = lattice.shape_codebook(SPLIT, 100.0, 0.5)
    assert check_nvd_product_bound(cb, 100.0, 0.5, 2)


def test_nvd_product_bound_non_nvd_counterexample():
    gens = [np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 0.0]]),
            np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[0.0, 0.0], [0.0, 1.0]])]
    singular = lattice.matrix_lattice(gens, "real")
    cb = lattice.shape_codebook(singular, 16.0, 0.5)
    res = check_nvd_product_bound(cb, 16.0, 0.5, 2)
    assert not res
    assert res.counterexample is not None
    assert res.counterexample["kind"] == "lower"


# ---------------------------------------------------------------------------
# outage estimation

def test_outage_zero_rate_never_in_outage():
    cfg = SystemConfig(n=2, m=1, r=0.0)
    est = estimate_outage("real", cfg, [5.0, 15.0], 2000, 1234)
    assert est.probs == (0.0, 0.0)
    assert math.isnan(est.slope)


def test_outage_deterministic():
    cfg = SystemConfig(n=2, m=1, r=0.5)
    a = estimate_outage("real", cfg, [10.0, 20.0], 30_000, 99)
    b = estimate_outage("real", cfg, [10.0, 20.0], 30_000, 99)
    assert a.probs == b.probs and a.events == b.events


def test_outage_thread_count_invariance(monkeypatch):
    cfg = SystemConfig(n=2, m=1, r=0.5)
    monkeypatch.setenv("DMTLAB_THREADS", "1")
    a = estimate_outage("real", cfg, [12.0], 70_000, 7, chunk=20_000)
    monkeypatch.setenv("DMTLAB_THREADS", "4")
    b = estimate_outage("real", cfg, [12.0], 70_000, 7, chunk=20_000)
    assert a.events == b.events


def test_outage_monotone_in_snr_and_rate():
    cfg_lo = SystemConfig(n=2, m=1, r=0.25)
    cfg_hi = SystemConfig(n=2, m=1, r=0.5)
    est_lo = estimate_outage("real", cfg_lo, [10.0, 20.0, 30.0], 50_000, 5)
    est_hi = estimate_outage("real", cfg_hi, [10.0, 20.0, 30.0], 50_000, 5)
    se = [math.sqrt(p * (1 - p) / t) for p, t in zip(est_lo.probs, est_lo.trials)]
    assert all(b <= a + 2 * (sa + 1e-9) for a, b, sa in
               zip(est_lo.probs, est_lo.probs[1:], se))
    assert all(hi >= lo - 2e-3 for lo, hi in zip(est_lo.probs, est_hi.probs))


def test_outage_real_event_matches_mutual_info_op():
    # the vectorized event rule reproduces the scalar operation
    rng = np.random.default_rng(14)
    rho = 10.0 ** 1.5
    for _ in range(50):
        h = rng.standard_normal((2, 2)) * np.sqrt(0.5)
        via_op = mutual_info_real(h, np.eye(2), rho, 2)
        g = np.eye(2) + (rho / 2) * (h @ h.T)
        _, logdet = np.linalg.slogdet(g)
        assert via_op == pytest.approx(logdet / (2 * math.log(2)), abs=1e-12)


def test_outage_quaternion_runs():
    cfg = SystemConfig(n=2, m=1, r=0.5)
    est = estimate_outage("quaternion", cfg, [10.0, 20.0], 50_000, 21)
    assert est.probs[1] < est.probs[0]


def test_outage_validation():
    with pytest.raises(ValueError):
        estimate_outage("real", SystemConfig(n=2, m=1, r=1.0), [10.0], 0, 1)
    with pytest.raises(ValueError):
        estimate_outage("banana", SystemConfig(n=2, m=1, r=0.5), [10.0], 10, 1)
    with pytest.raises(ValueError):
        estimate_outage("quaternion", SystemConfig(n=2, m=2, r=1.5), [10.0], 10, 1)


# ---------------------------------------------------------------------------
# error estimation

def test_error_noiseless_decodes_exactly():
    cfg = SystemConfig(n=2, m=1, r=0.0)
    est = estimate_error_prob("quaternion", HAMILTON, cfg, [10.0, 20.0], 2000, 3,
                              noise_scale=0.0)
    assert est.probs == (0.0, 0.0)


def test_error_deterministic():
    cfg = SystemConfig(n=2, m=1, r=0.0)
    a = estimate_error_prob("quaternion", HAMILTON, cfg, [14.0], 20_000, 8)
    b = estimate_error_prob("quaternion", HAMILTON, cfg, [14.0], 20_000, 8)
    assert a.events == b.events


def test_error_flavor_mode_mismatch():
    cfg = SystemConfig(n=2, m=1, r=0.0)
    with pytest.raises(ValueError):
        estimate_error_prob("real", HAMILTON, cfg, [10.0], 100, 1)
    with pytest.raises(ValueError):
        estimate_error_prob("quaternion", SPLIT, cfg, [10.0], 100, 1)


def test_error_trials_per_point():
    cfg = SystemConfig(n=2, m=1, r=0.0)
    est = estimate_error_prob("quaternion", HAMILTON, cfg, [14.0, 20.0],
                              [5000, 10_000], 5)
    assert est.trials == (5000, 10_000)
    with pytest.raises(ValueError):
        estimate_error_prob("quaternion", HAMILTON, cfg, [14.0, 20.0], [5000], 5)


def test_error_rate_at_least_outage():
    # ML error of a code cannot beat outage at the code's actual rate
    # (log2 |C| / n bits; the nominal r log2(rho) is only asymptotic)
    cfg = SystemConfig(n=2, m=1, r=0.5)
    snr = [16.0]
    rho = 10.0 ** (snr[0] / 10.0)
    cb = lattice.shape_codebook(SPLIT, rho, cfg.r)
    rate_bits = math.log2(len(cb.points)) / cfg.n
    r_matched = rate_bits / math.log2(rho)
    out = estimate_outage("real", SystemConfig(n=2, m=1, r=r_matched), snr, 40_000, 17)
    err = estimate_error_prob("real", SPLIT, cfg, snr, 40_000, 17)
    se = math.sqrt(out.probs[0] * (1 - out.probs[0]) / out.trials[0])
    assert err.probs[0] >= out.probs[0] - 2 * se


def test_error_shaped_codebook_grows_with_snr():
    cfg = SystemConfig(n=2, m=1, r=0.5)
    est = estimate_error_prob("quaternion", HAMILTON, cfg, [10.0, 18.0], 4000, 9)
    assert all(0.0 <= p <= 1.0 for p in est.probs)


def test_fit_slope_uniform_weighting():
    # uneven event counts tilt the weighted fit; the uniform fit does not
    snr = [10.0, 20.0, 30.0]
    probs = [0.2, 0.011, 0.0012]
    weighted = fit_slope(snr, probs, [10**6] * 3).slope
    uniform = fit_slope(snr, probs, [10**6] * 3, weighting="uniform").slope
    x = np.array(snr) / 10
    y = -np.log10(probs)
    expect = np.polyfit(x, y, 1)[0]
    assert uniform == pytest.approx(float(expect), abs=1e-9)
    assert weighted != pytest.approx(uniform, abs=1e-3)
    with pytest.raises(ValueError):
        fit_slope(snr, probs, [10**6] * 3, weighting="banana")
