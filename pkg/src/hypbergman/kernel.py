"""Truncated automorphic series for the weight-k Bergman kernel and metric.

    B_k(z)   = sum_g i^(2k) / ((z - g zbar)^(2k) (c zbar + d)^(2k))
    B_k^X(z) = (2k - 1)/(4 pi) (2y)^(2k) B_k(z)

summed over a finite ``ElementSet`` shell by shell (word length), each shell
with compensated accumulation and shells combined with ``math.fsum``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DegenerateKernel, InvalidWeight, MissingIdentity
from .groups import ElementSet
from .hyperbolic import as_point
from .tolerances import TOL

MIN_WEIGHT = 3
LOG_POWER_FROM = 64  # weights from here on use exp/log powers


def check_weight(k):
    if int(k) != k or k < MIN_WEIGHT:
        raise InvalidWeight(f"weight k must be an integer >= {MIN_WEIGHT}, got {k!r}")
    return int(k)


def _check_identity(elems: ElementSet):
    if not len(elems) or not np.array_equal(elems.matrices[0], [1.0, 0.0, 0.0, 1.0]):
        raise MissingIdentity("element set does not start with the identity")


def _fsum_c(vals):
    vals = list(vals)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def two_y_power(y, k):
    """(2y)^(-2k), through exp/log for large weights."""
    try:
        if k >= LOG_POWER_FROM:
            return math.exp(-2 * k * math.log(2.0 * y))
        return (2.0 * y) ** (-2 * k)
    except OverflowError:
        return math.inf


@dataclass
class SeriesSums:
    """All four series at one (z, k), scaled by (2y)^(2k), plus shell data."""
    z: object
    k: int
    B: complex
    dz: complex
    dzbar: complex
    dzdzbar: complex
    shell_abs: np.ndarray          # sum of |terms| per shell, scaled
    shells: np.ndarray             # (n_shells, 4) per-shell sums of all four series, scaled
    n_terms: int
    max_word_length: int

    @property
    def scale(self):
        return two_y_power(self.z.y, self.k)

    @property
    def shell_B(self) -> np.ndarray:
        return self.shells[:, 0]

    def excess(self, j=0) -> complex:
        """Scaled series j without the identity term (shell 0)."""
        return _fsum_c(self.shells[1:, j])

    @property
    def abs_sum(self) -> float:
        return math.fsum(self.shell_abs)


def series_sums(z, k, elems: ElementSet) -> SeriesSums:
    z = as_point(z)
    k = check_weight(k)
    _check_identity(elems)
    shells = elems.shell_starts()
    out, absum = _backend.series_shells(np.ascontiguousarray(elems.matrices),
                                        shells, z.x, z.y, k)
    totals = [_fsum_c(out[:, j]) for j in range(4)]
    return SeriesSums(z, k, *totals, shell_abs=absum, shells=out,
                      n_terms=len(elems), max_word_length=elems.max_word_length)


def tail_estimate(shell_abs) -> tuple[float, float]:
    """(last shell magnitude, heuristic geometric tail), never added to values."""
    if len(shell_abs) < 2:
        return 0.0, 0.0
    last, prev = float(shell_abs[-1]), float(shell_abs[-2])
    if prev > last:
        return last, min(last * last / (prev - last), last)
    return last, last


@dataclass
class KernelEvaluation:
    value: complex
    k: int
    truncation_word_length: int
    last_shell_magnitude: float
    tail_estimate: float
    n_terms: int = 0
    abs_sum: float = 0.0          # sum of |terms|, same units as value
    shell_magnitudes: list = field(default_factory=list, repr=False)

    @property
    def real(self) -> float:
        return self.value.real

    def is_real_positive(self, tol=None) -> bool:
        tol = TOL.realness if tol is None else tol
        return self.value.real > 0 and abs(self.value.imag) <= tol * abs(self.value)

    def to_dict(self):
        return {"value": self.value.real, "value_imag": self.value.imag, "k": self.k,
                "truncation_word_length": self.truncation_word_length,
                "last_shell_magnitude": self.last_shell_magnitude,
                "tail_estimate": self.tail_estimate, "n_terms": self.n_terms}


def _evaluation(s: SeriesSums, factor: float) -> KernelEvaluation:
    mags = [float(v) * factor for v in s.shell_abs]
    last, tail = tail_estimate(mags)
    return KernelEvaluation(s.B * factor, s.k, s.max_word_length, last, tail,
                            s.n_terms, s.abs_sum * factor, mags)


def series_B(z, k, elems: ElementSet) -> KernelEvaluation:
    s = series_sums(z, k, elems)
    return _evaluation(s, s.scale)


def kernel_prefactor(k) -> float:
    return (2 * k - 1) / (4 * math.pi)


def bergman_kernel_X(z, k, elems: ElementSet, sums: SeriesSums | None = None) -> KernelEvaluation:
    """(2k-1)/(4 pi) (2y)^(2k) B_k(z); the (2y) powers cancel in the scaled sums."""
    s = sums if sums is not None else series_sums(z, k, elems)
    return _evaluation(s, kernel_prefactor(s.k))


@dataclass
class DerivativeBundle:
    dz: complex
    dzbar: complex
    dzdzbar: complex
    k: int
    truncation_word_length: int
    n_terms: int


def series_derivatives(z, k, elems: ElementSet) -> DerivativeBundle:
    """d/dz, d/dzbar and d^2/dz dzbar of the truncated B_k at z."""
    s = series_sums(z, k, elems)
    f = s.scale
    return DerivativeBundle(s.dz * f, s.dzbar * f, s.dzdzbar * f, s.k,
                            s.max_word_length, s.n_terms)


def _ratio(s: SeriesSums) -> float:
    # With scaled sums B = 1 + e, B_z = a0 + ea, B_zbar = b0 + eb,
    # B_zzbar = c0 + ec, where a0 = ik/y, b0 = -ik/y, c0 = k(2k+1)/(2y^2) are the
    # identity terms, the ratio is
    #   Re[(k/2)(2e + e^2) + y^2 (a0 eb + b0 ea + ea eb - c0 e - ec (1 + e))] / (pi (1+e)^2).
    # The k/(2pi) of the identity cancels analytically, so the ratio keeps full
    # relative precision when the non-identity terms are tiny (large k).
    if abs(s.B) < TOL.degenerate:
        raise DegenerateKernel(f"|B_k| = {abs(s.B)!r} at {s.z}")
    if s.shells.shape[0] < 2:
        return 0.0
    k, y = s.k, s.z.y
    e, ea, eb, ec = (s.excess(j) for j in range(4))
    a0, b0, c0 = 1j * k / y, -1j * k / y, k * (2 * k + 1) / (2 * y * y)
    num = 0.5 * k * (2 * e + e * e) + y * y * (a0 * eb + b0 * ea + ea * eb - c0 * e - ec * (1 + e))
    return (num / (1 + e) ** 2).real / math.pi


def ratio_ber_hyp(z, k, elems: ElementSet, sums: SeriesSums | None = None) -> float:
    """Coefficient ratio of the weight-k Bergman metric to the Poincare metric.

    k/(2 pi) + (y^2/pi) (B_z B_zbar / B^2 - B_zzbar / B); all four series
    share the (2y)^(2k) scaling, which cancels.  Evaluated from the
    non-identity parts of the sums, so it is zero for the identity alone.
    """
    return _ratio(sums if sums is not None else series_sums(z, k, elems))


def bergman_metric_density(z, k, elems: ElementSet, sums: SeriesSums | None = None) -> float:
    """Density of the Bergman metric against dx dy."""
    z = as_point(z)
    return ratio_ber_hyp(z, k, elems, sums) / (z.y * z.y)
