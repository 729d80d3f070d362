"""Matrix lattices, the non-vanishing-determinant property, and shaping.

Two concrete rank-4 orders in 2x2 matrices are built in:

  * ``hamilton`` -- the Lipschitz order of Hamilton's quaternions, embedded
    as quaternionic-structured complex matrices; det(image of a+bi+cj+dk)
    is the quaternion norm a^2+b^2+c^2+d^2.
  * ``split``    -- the order Z<i,j> of the rational quaternion algebra with
    i^2 = 2, j^2 = 3, embedded in real 2x2 matrices; det(image of
    (x, y, z, w)) = x^2 - 2y^2 - 3z^2 + 6w^2.

Both have minimum determinant 1 over the nonzero points (reduced norms of
an order are rational integers), which the enumeration-based audits verify.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import quaternionic_defect

FLAVORS = ("real", "quaternionic", "complex")

SQRT2 = math.sqrt(2.0)


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed its configured point or pair budget."""


@dataclass(frozen=True)
class MatrixLattice:
    """Integer span of real-linearly-independent n x n generator matrices."""

    ambient_n: int
    basis: tuple
    flavor: str
    gram: np.ndarray

    @property
    def rank(self):
        return len(self.basis)


@dataclass(frozen=True)
class Codebook:
    """Finite scaled constellation: points X/M for shell points X, |X| <= M."""

    points: tuple
    radius_m: float
    rho: float
    r: float
    source: MatrixLattice


def structure_check(x, flavor):
    """Exact structural predicate for a flavor (no tolerance)."""
    a = linalg.as_matrix(x)
    if flavor == "real":
        return bool(np.all(a.imag == 0.0))
    if flavor == "quaternionic":
        if a.shape[0] != a.shape[1] or a.shape[0] % 2:
            raise ValueError("quaternionic check needs an even square matrix")
        return quaternionic_defect(a) == 0.0
    if flavor == "complex":
        return True
    raise ValueError(f"unknown flavor {flavor!r}")


def matrix_lattice(basis, flavor):
    """Validate generators, compute the Gram matrix, and freeze the lattice."""
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}")
    mats = tuple(linalg.as_matrix(b) for b in basis)
    if not mats:
        raise ValueError("empty generator list")
    n = mats[0].shape[0]
    for b in mats:
        if b.shape != (n, n):
            raise ValueError("generators must be square matrices of equal size")
        if not structure_check(b, flavor):
            raise ValueError(f"generator violates the {flavor} structure")
    k = len(mats)
    max_rank = 2 * n * n if flavor == "complex" else n * n
    if k > max_rank:
        raise ValueError(f"rank {k} exceeds {max_rank} for flavor {flavor}")
    gram = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            gram[i, j] = float(np.sum(mats[i].real * mats[j].real
                                      + mats[i].imag * mats[j].imag))
    gram = 0.5 * (gram + gram.T)
    spectrum = np.linalg.eigvalsh(gram)
    if spectrum[0] <= 1e-10 * max(spectrum[-1], 1e-300):
        raise ValueError("generators are linearly dependent (Gram not positive definite)")
    for b in mats:
        b.flags.writeable = False
    frozen = gram.copy()
    frozen.flags.writeable = False
    return MatrixLattice(ambient_n=n, basis=mats, flavor=flavor, gram=frozen)


def build_hamilton_order():
    """Lipschitz order: images of 1, i, j, k under the standard embedding."""
    one = np.array([[1, 0], [0, 1]], dtype=complex)
    i_ = np.array([[1j, 0], [0, -1j]], dtype=complex)
    j_ = np.array([[0, -1], [1, 0]], dtype=complex)
    k_ = np.array([[0, -1j], [-1j, 0]], dtype=complex)
    return matrix_lattice([one, i_, j_, k_], "quaternionic")


def build_split_order():
    """Order Z<i,j> of the (2, 3) rational quaternion algebra in real matrices.

    (x, y, z, w) maps to [[x + y*sqrt(2), z + w*sqrt(2)],
                          [3(z - w*sqrt(2)), x - y*sqrt(2)]].
    """
    one = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
    i_ = np.array([[SQRT2, 0.0], [0.0, -SQRT2]], dtype=complex)
    j_ = np.array([[0.0, 1.0], [3.0, 0.0]], dtype=complex)
    k_ = np.array([[0.0, SQRT2], [-3.0 * SQRT2, 0.0]], dtype=complex)
    return matrix_lattice([one, i_, j_, k_], "real")


BUILTIN_LATTICES = {"hamilton": build_hamilton_order, "split": build_split_order}


def _ball_volume(dim, radius):
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * radius ** dim


def shell_point_estimate(lat, radius):
    """Volume heuristic for the number of lattice points in a radius ball."""
    covol = math.sqrt(float(np.linalg.det(lat.gram)))
    return _ball_volume(lat.rank, radius) / covol + 1.0


def shell_coordinates(lat, radius, cap=1_000_000):
    """Integer coordinate vectors of all lattice points with norm <= radius.

    Depth-first search bounded by the Cholesky factor of the Gram matrix
    (branch-and-bound on partial squared norms).  The radius comparison
    carries a 1e-12 relative slack so boundary shells like sqrt(2) do not
    depend on rounding luck.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    try:
        low = np.linalg.cholesky(lat.gram)
    except np.linalg.LinAlgError:
        raise ValueError("Gram matrix is not positive definite")
    rmat = low.T
    k = lat.rank
    budget = radius * radius * (1.0 + 1e-12)
    coords = np.zeros(k, dtype=np.int64)
    out = []

    def descend(level, remaining):
        if level < 0:
            out.append(coords.copy())
            if len(out) > cap:
                raise ResourceLimitError(
                    f"shell exceeds the {cap}-point cap "
                    f"(estimate {shell_point_estimate(lat, radius):.3g})")
            return
        y = float(rmat[level, level + 1:] @ coords[level + 1:])
        rii = rmat[level, level]
        half = math.sqrt(max(remaining, 0.0))
        lo = math.ceil((-half - y) / rii - 1e-12)
        hi = math.floor((half - y) / rii + 1e-12)
        for c in range(lo, hi + 1):
            step = rii * c + y
            rem = remaining - step * step
            if rem >= -1e-12 * budget:
                coords[level] = c
                descend(level - 1, rem)
        coords[level] = 0

    descend(k - 1, budget)
    return np.array(sorted(map(tuple, out)), dtype=np.int64).reshape(len(out), k)


def point_from_coordinates(lat, coords):
    x = np.zeros((lat.ambient_n, lat.ambient_n), dtype=complex)
    for c, b in zip(coords, lat.basis):
        if c:
            x = x + int(c) * b
    return x


def enumerate_shell(lat, radius, cap=1_000_000):
    """All lattice points of Frobenius norm <= radius (the zero point included)."""
    return [point_from_coordinates(lat, c) for c in shell_coordinates(lat, radius, cap=cap)]


def coordinates_of(lat, x):
    """Real coordinates of a matrix in the generator basis (via the Gram system)."""
    a = linalg.as_matrix(x)
    rhs = np.array([float(np.sum(a.real * b.real + a.imag * b.imag)) for b in lat.basis])
    return np.linalg.solve(lat.gram, rhs)


def min_det(lat, radius, cap=1_000_000):
    """Minimum |det| over the nonzero lattice points of norm <= radius."""
    coords = shell_coordinates(lat, radius, cap=cap)
    vals = [abs(linalg.determinant(point_from_coordinates(lat, c)))
            for c in coords if np.any(c)]
    if not vals:
        raise ValueError("no nonzero lattice point within the given radius")
    return min(vals)


def shape_codebook(lat, rho, r, cap=1_000_000):
    """Spherically shaped code: radius M = rho^(r n / k), points scaled by 1/M."""
    if rho < 1:
        raise ValueError("rho must be >= 1")
    if r < 0:
        raise ValueError("r must be >= 0")
    m_radius = float(rho) ** (r * lat.ambient_n / lat.rank)
    est = shell_point_estimate(lat, m_radius)
    if est > cap:
        raise ResourceLimitError(
            f"estimated shell size {est:.3g} exceeds the cap {cap}")
    pts = []
    for x in enumerate_shell(lat, m_radius, cap=cap):
        scaled = x / m_radius
        scaled.flags.writeable = False
        pts.append(scaled)
    return Codebook(points=tuple(pts), radius_m=m_radius, rho=float(rho),
                    r=float(r), source=lat)


def fixed_codebook(lat, size=16):
    """A fixed constellation of `size` codewords for zero-multiplexing runs.

    Prefers the smallest norm shell that alone holds `size` points: keeping
    all codewords at equal norm maximizes the minimum distance relative to
    the scaling radius.  Falls back to a smallest-norm fill when no single
    shell is large enough.  Selection is deterministic (norm, then
    lexicographic coordinates); points are scaled by the largest norm so the
    power constraint holds.
    """
    if size < 2:
        raise ValueError("need at least 2 codewords")
    radius = math.sqrt(float(np.min(np.diag(lat.gram))))
    while True:
        coords = shell_coordinates(lat, radius)
        nz = [c for c in coords if np.any(c)]
        if len(nz) >= 2 * size:
            break
        radius *= 1.5
    norms = [(float(c @ lat.gram @ c), tuple(int(v) for v in c)) for c in nz]
    norms.sort()
    by_shell = {}
    for n2, c in norms:
        by_shell.setdefault(round(n2, 9), []).append(c)
    chosen = None
    for key in sorted(by_shell):
        if len(by_shell[key]) >= size:
            chosen = by_shell[key][:size]
            break
    if chosen is None:
        chosen = [c for _, c in norms[:size]]
    pts = [point_from_coordinates(lat, np.array(c)) for c in chosen]
    m_fix = max(linalg.frobenius_norm(x) for x in pts)
    scaled = []
    for x in pts:
        y = x / m_fix
        y.flags.writeable = False
        scaled.append(y)
    return Codebook(points=tuple(scaled), radius_m=m_fix, rho=1.0, r=0.0, source=lat)


# ---------------------------------------------------------------------------
# JSON interchange: matrices as row-major [re, im] pairs.

def _matrix_to_pairs(x):
    a = linalg.as_matrix(x)
    return [[float(v.real), float(v.imag)] for v in a.ravel()]


def _matrix_from_pairs(pairs, n):
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(n, n)


def lattice_to_json(lat):
    return {"ambient_n": lat.ambient_n, "flavor": lat.flavor,
            "basis": [_matrix_to_pairs(b) for b in lat.basis]}


def lattice_from_json(data):
    n = int(data["ambient_n"])
    basis = [_matrix_from_pairs(b, n) for b in data["basis"]]
    return matrix_lattice(basis, data["flavor"])


def codebook_to_json(cb):
    lat = cb.source
    return {"ambient_n": lat.ambient_n, "flavor": lat.flavor,
            "points": [_matrix_to_pairs(p) for p in cb.points],
            "radius_m": cb.radius_m, "rho": cb.rho, "r": cb.r}


def load_lattice(name_or_path):
    """Resolve a built-in lattice name or read a lattice JSON file."""
    if name_or_path in BUILTIN_LATTICES:
        return BUILTIN_LATTICES[name_or_path]()
    with open(name_or_path, encoding="utf-8") as fh:
        return lattice_from_json(json.load(fh))
