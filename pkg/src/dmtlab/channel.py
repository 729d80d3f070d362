"""MIMO channel model, its stacked-real and quaternionic equivalents,
and the mutual-information / power-constraint functionals.

Conventions fixed here and used everywhere else:
  * received block  Y = sqrt(rho/n) H X + W, noise entries unit variance;
  * rates in bits (log base 2), so a rate threshold is r*log2(rho);
  * the quaternionic equivalent channel also carries the 1/sqrt(n) factor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, cmatmul, conj_transpose, frobenius_norm, hermitian_eigenvalues

LOG2 = np.log(2.0)


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, SNR and multiplexing gain of one simulated system.

    n transmit antennas (= block length), m receive antennas, linear-scale
    SNR rho, multiplexing gain r.
    """

    n: int
    m: int
    rho: float = 1.0
    r: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("antenna counts must be >= 1")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0 <= self.r <= min(self.m, self.n):
            raise ValueError(f"r={self.r} outside [0, min(m, n)]")

    @property
    def p(self):
        """Half the transmit count; only meaningful in quaternionic mode."""
        if self.n % 2:
            raise ValueError("quaternionic mode needs even n")
        return self.n // 2


@dataclass(frozen=True)
class ChannelSample:
    """One fading + noise realization (h: m x n channel, w: m x n noise)."""

    h: np.ndarray
    w: np.ndarray


def sample_channel(cfg, rng):
    """Draw i.i.d. circularly symmetric complex Gaussian H and W.

    Each entry has variance 1/2 per real dimension (unit total variance).
    Draw order is h then w, so a given generator state fixes the sample.
    """
    shape = (cfg.m, cfg.n)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
    w = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
    h.flags.writeable = False
    w.flags.writeable = False
    return ChannelSample(h=h, w=w)


def apply_channel(cfg, sample, xbar):
    """Received block sqrt(rho/n) * H sXbar + W for an n x n codeword."""
    x = as_matrix(xbar)
    if x.shape != (cfg.n, cfg.n):
        raise ValueError(f"codeword must be {cfg.n}x{cfg.n}, got {x.shape}")
    return np.sqrt(cfg.rho / cfg.n) * cmatmul(sample.h, x) + sample.w


def realify(m):
    """Stack Re(M) over Im(M): the 2m x n real form of an m x n complex block."""
    a = as_matrix(m)
    return np.vstack([a.real, a.imag])


def apply_channel_real(cfg, sample, xbar):
    """Received block of the equivalent stacked-real system (2m x n real).

    For a real codeword this equals realify(apply_channel(...)) exactly, not
    just to rounding: both paths evaluate the same per-block real products.
    """
    x = as_matrix(xbar)
    if x.shape != (cfg.n, cfg.n):
        raise ValueError(f"codeword must be {cfg.n}x{cfg.n}, got {x.shape}")
    if np.any(x.imag != 0.0):
        raise ValueError("the stacked-real system carries real codewords only")
    scale = np.sqrt(cfg.rho / cfg.n)
    h, w = sample.h, sample.w
    top = scale * (h.real @ x.real) + w.real
    bot = scale * (h.imag @ x.real) + w.imag
    return np.vstack([top, bot])


def quaternion_lift(m):
    """Lift an m x 2p block (M1 M2) to [[M1, M2], [-conj(M2), conj(M1)]].

    The lift is multiplicative against quaternionic codewords, which is what
    turns the plain channel into its quaternionic equivalent form.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if cols % 2:
        raise ValueError(f"quaternion lift needs an even column count, got {cols}")
    p = cols // 2
    m1, m2 = a[:, :p], a[:, p:]
    top = np.hstack([m1, m2])
    bot = np.hstack([-m2.conj(), m1.conj()])
    return np.vstack([top, bot])


def quaternionic_defect(m):
    """Max entry deviation from the [[A, -B*], [B, A*]] block structure."""
    a = as_matrix(m)
    rows, cols = a.shape
    if rows != cols or rows % 2:
        raise ValueError("quaternionic structure needs an even square matrix")
    p = rows // 2
    top_l, top_r = a[:p, :p], a[:p, p:]
    bot_l, bot_r = a[p:, :p], a[p:, p:]
    d1 = np.abs(bot_l + top_r.conj()).max() if p else 0.0
    d2 = np.abs(bot_r - top_l.conj()).max() if p else 0.0
    return float(max(d1, d2))


def mutual_info_real(h, q, rho, n):
    """0.5 * log2 det(I + (rho/n) H Q H^T) in bits per channel use.

    H is the stacked-real channel, Q a symmetric PSD input covariance.
    A trace above n is reported with a warning but not rejected.
    """
    h = as_matrix(h, dtype=float)
    q = as_matrix(q, dtype=float)
    if q.shape != (h.shape[1], h.shape[1]):
        raise ValueError(f"Q must be {h.shape[1]}x{h.shape[1]}, got {q.shape}")
    if np.abs(q - q.T).max() > 1e-10 * max(1.0, np.abs(q).max()):
        raise ValueError("Q must be symmetric")
    if np.trace(q) > n + 1e-9:
        warnings.warn(f"trace(Q)={np.trace(q):.6g} exceeds n={n}", stacklevel=2)
    a = np.eye(h.shape[0]) + (rho / n) * (h @ q @ h.T)
    _, logdet = np.linalg.slogdet(a)
    return max(logdet, 0.0) / (2.0 * LOG2)


def capacity_quaternion(h, rho):
    """log2 det(I + rho H^dag H) for a quaternionic-structured channel.

    Computed as 2 * sum(log2(1 + rho * lambda_i)) over the p distinct
    eigenvalues; the multiplicity-2 pairing of the spectrum is asserted.
    """
    a = as_matrix(h)
    if quaternionic_defect(a) > 1e-10 * (1.0 + frobenius_norm(a)):
        raise ValueError("channel does not have quaternionic block structure")
    lam = hermitian_eigenvalues(cmatmul(conj_transpose(a), a))
    pairs_hi, pairs_lo = lam[0::2], lam[1::2]
    gap = np.abs(pairs_hi - pairs_lo)
    ref = max(float(lam[0]), 1e-30)
    if gap.size and gap.max() > 1e-8 * ref:
        raise ValueError(f"eigenvalue pairing violated: gap {gap.max():.3e}")
    lam_distinct = np.clip(pairs_hi, 0.0, None)
    return float(2.0 * np.sum(np.log2(1.0 + rho * lam_distinct)))


def power_check(cb, tol=1e-12):
    """Average power (1/|C|)(1/n^2) sum ||X||^2 and whether it is <= 1."""
    if not cb.points:
        raise ValueError("empty codebook")
    n = cb.points[0].shape[0]
    avg = sum(frobenius_norm(x) ** 2 for x in cb.points) / (len(cb.points) * n * n)
    return avg, avg <= 1.0 + tol
