"""Fubini-Study charts on Gr(r, n) and volume densities on Sym^d(X).

A chart point is a complex (n - r) x r matrix M whose frame is [Id_r; M].
The Fubini-Study potential there is log det(Id + M* M).

On Sym^d(X) the pulled-back Fubini-Study form is built from the Bergman
kernel of Omega^k(-D).  That kernel is not computed: B_k^X stands in for it,
which is accurate only up to O(1/k).  Every Sym^d output carries
``SUBSTITUTION_CAVEAT`` to say so.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import finite_diff
from .bounds import COROLLARY_BOUND, _check_increasing, _elems_for, constant_CX, theorem1_rhs
from .errors import DimensionError, ValidationError
from .hyperbolic import as_point
from .kernel import bergman_kernel_X, check_weight, ratio_ber_hyp

SUBSTITUTION_CAVEAT = (
    "Bergman kernel of Omega^k(-D) replaced by B_k^X (error O(1/k), not quantified); "
    "the additive o_z(k) term of the volume bound is not computed, so the bound is "
    "not certified as an inequality")

MAX_CHART_ENTRY = 1e8


@dataclass(frozen=True)
class GrassmannDims:
    g: int
    k: int
    d: int

    def __post_init__(self):
        if self.g < 2 or self.d < 1:
            raise ValidationError(f"need genus >= 2 and d >= 1, got g={self.g}, d={self.d}")
        if not 2 * (self.k - 1) * (self.g - 1) > self.d:
            raise DimensionError(
                f"k={self.k}: 2(k-1)(g-1) = {2 * (self.k - 1) * (self.g - 1)} "
                f"does not exceed d={self.d}")

    @property
    def n_k(self) -> int:
        return (2 * self.k - 1) * (self.g - 1)

    @property
    def r_k(self) -> int:
        return self.n_k - self.d


class ChartMatrix:
    """Chart coordinates M of a point of Gr(r, n); ``tilde`` is the frame [Id; M]."""

    def __init__(self, entries, dims: GrassmannDims | None = None):
        m = np.atleast_2d(np.asarray(entries, dtype=complex))
        if m.ndim != 2:
            raise DimensionError(f"chart matrix must be 2-D, got shape {m.shape}")
        if dims is not None and m.shape != (dims.n_k - dims.r_k, dims.r_k):
            raise DimensionError(
                f"chart shape {m.shape} does not match Gr({dims.r_k}, {dims.n_k})")
        self.entries = m
        self.dims = dims

    @property
    def r(self) -> int:
        return self.entries.shape[1]

    @property
    def n(self) -> int:
        return self.entries.shape[0] + self.entries.shape[1]

    @property
    def tilde(self) -> np.ndarray:
        return np.vstack([np.eye(self.r), self.entries])

    def gram(self) -> np.ndarray:
        m = self.entries
        return np.eye(self.r) + m.conj().T @ m


def fs_norm_sq(M: ChartMatrix, s) -> float:
    """s* (Id + M* M) s."""
    s = np.asarray(s, dtype=complex).ravel()
    if s.shape != (M.r,):
        raise DimensionError(f"vector of length {s.shape[0]} for a chart with r={M.r}")
    return float(np.real(s.conj() @ M.gram() @ s))


def _log_det_gram(m: np.ndarray) -> float:
    g = np.eye(m.shape[1]) + m.conj().T @ m
    L = np.linalg.cholesky(g)
    return 2.0 * float(np.sum(np.log(np.real(np.diag(L)))))


def fs_log_det(M: ChartMatrix) -> float:
    """log det(Id + M* M) >= 0, via Cholesky."""
    return _log_det_gram(M.entries)


def fs_form_fd(M: ChartMatrix, i, j, h=None) -> complex:
    """(1/2pi) d^2 log det(Id + M*M) / dm_i dmbar_j by central differences.

    ``i`` and ``j`` index entries of M, as (row, col) pairs or row-major flat
    indices.  Normalised so the matrix over all (i, j) is positive
    semi-definite, 1/(2 pi (1 + |w|^2)^2) on Gr(1, 2).
    """
    m0 = M.entries
    if np.abs(m0).max(initial=0.0) > MAX_CHART_ENTRY:
        raise ValidationError(f"chart entries exceed {MAX_CHART_ENTRY:g}; step would underflow")
    shape = m0.shape
    size = m0.size
    fi = _flat(i, shape)
    fj = _flat(j, shape)
    h = finite_diff.SECOND_STEP * max(1.0, float(np.abs(m0).max(initial=0.0))) if h is None else h

    # real coordinates: re(m) then im(m), flattened
    x0 = np.concatenate([m0.real.ravel(), m0.imag.ravel()])

    def f(x):
        return _log_det_gram((x[:size] + 1j * x[size:]).reshape(shape))

    def e(p):
        v = np.zeros(2 * size)
        v[p] = 1.0
        return v

    xi, yi, xj, yj = e(fi), e(size + fi), e(fj), e(size + fj)
    d = finite_diff.mixed_partial
    val = 0.25 * ((d(f, x0, xi, xj, h) + d(f, x0, yi, yj, h))
                  + 1j * (d(f, x0, xi, yj, h) - d(f, x0, yi, xj, h)))
    return val / (2 * math.pi)


def _flat(i, shape):
    if isinstance(i, (tuple, list)):
        r, c = i
        if not (0 <= r < shape[0] and 0 <= c < shape[1]):
            raise DimensionError(f"entry {i} outside a {shape} chart")
        return r * shape[1] + c
    if not 0 <= i < shape[0] * shape[1]:
        raise DimensionError(f"entry {i} outside a {shape} chart")
    return int(i)


def fs_form_matrix(M: ChartMatrix, h=None) -> np.ndarray:
    """All Fubini-Study coefficients at M, an N x N Hermitian matrix, N = r(n-r)."""
    n = M.entries.size
    H = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            H[a, b] = fs_form_fd(M, a, b, h)
            H[b, a] = np.conj(H[a, b])
    return H


@dataclass(frozen=True)
class SymPoint:
    """Unordered d-tuple of points, kept sorted by (x, y)."""
    points: tuple

    def __post_init__(self):
        pts = tuple(sorted(as_point(p) for p in self.points))
        if not pts:
            raise ValidationError("a point of Sym^d needs d >= 1 points")
        object.__setattr__(self, "points", pts)

    @property
    def d(self) -> int:
        return len(self.points)


def _sym(p) -> SymPoint:
    return p if isinstance(p, SymPoint) else SymPoint(tuple(p))


def symd_hyp_volume_density(p) -> float:
    """prod 1/y_i^2."""
    return math.prod(1.0 / (q.y * q.y) for q in _sym(p).points)


def _dims_check(genus, k, d):
    GrassmannDims(genus, k, d)


def symd_volume_ratio(p, k, elems, genus=2) -> float:
    """prod_i mu_ber/mu_hyp at z_i: the estimated FS / hyperbolic volume ratio."""
    p = _sym(p)
    k = check_weight(k)
    _dims_check(genus, k, p.d)
    return math.prod(ratio_ber_hyp(q, k, _elems_for(elems, q, k)) for q in p.points)


def symd_fs_volume_estimate(p, k, elems, genus=2) -> tuple[float, str]:
    """Estimated density of the pulled-back Fubini-Study volume form, and its caveat."""
    p = _sym(p)
    return symd_volume_ratio(p, k, elems, genus) * symd_hyp_volume_density(p), SUBSTITUTION_CAVEAT


def theorem2_rhs(p, k, elems, r_X, genus=2) -> float:
    """Product over the points of the single-point metric bound (o_z(k) omitted)."""
    p = _sym(p)
    k = check_weight(k)
    _dims_check(genus, k, p.d)
    cx = constant_CX(k, r_X)
    return math.prod(theorem1_rhs(k, cx, bergman_kernel_X(q, k, _elems_for(elems, q, k)).real)
                     for q in p.points)


def corollary2_scan(p, k_list, elems, genus=2) -> dict:
    """(1/k^(2d)) |volume ratio| per k against (26/pi)^d."""
    p = _sym(p)
    bound = COROLLARY_BOUND ** p.d
    rows = []
    for k in _check_increasing(k_list):
        v = abs(symd_volume_ratio(p, k, elems, genus)) / k ** (2 * p.d)
        rows.append({"k": k, "value": v, "bound": bound, "below": v <= bound})
    return {"points": [[q.x, q.y] for q in p.points], "d": p.d, "rows": rows,
            "below_at_largest_k": bool(rows) and rows[-1]["below"], "caveat": SUBSTITUTION_CAVEAT}

