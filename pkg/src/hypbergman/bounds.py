"""Explicit constants and right-hand sides of the kernel and metric estimates.

The r_X fed in here normally comes from ``injectivity_radius`` and is only an
upper bound.  C_X decreases in r_X, so every report also carries C_X at
r_X / 2 as a conservative sensitivity value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateKernel, InvalidWeight, ValidationError
from .groups import ElementSet
from .hyperbolic import as_point, displacement_array
from .kernel import (bergman_kernel_X, check_weight, kernel_prefactor,
                     ratio_ber_hyp, series_sums)
from .tolerances import TOL

COROLLARY_BOUND = 26.0 / math.pi


def constant_CX(k, r_X) -> float:
    k = check_weight(k)
    r_X = float(r_X)
    if not r_X > 0:
        raise ValidationError(f"r_X must be positive, got {r_X}")
    def icosh(x, n):  # cosh(x)^-n without overflow
        return math.exp(-n * (x + math.log1p(math.exp(-2 * x)) - math.log(2)))

    s4 = math.sinh(r_X / 4) if r_X < 1400 else math.inf
    head = (2 * k - 1) / (4 * math.pi) * (
        2 + 16 * icosh(r_X / 4, 2 * k - 4) + 8 * icosh(r_X / 2, 2 * k - 3))
    tail = (2 * k - 1) / (2 * math.pi * s4 * s4) * (
        icosh(r_X / 2, 2 * k - 3) / (2 * k - 2) + icosh(r_X / 2, 2 * k - 4) / (k - 2))
    return head + tail


def theorem1_rhs(k, C_X, BkX) -> float:
    """k^2/pi * C/B * (4C/B + 5 + 1/(2k)) + k/(2pi)."""
    if not BkX > 0:
        raise DegenerateKernel(f"Bergman kernel must be positive, got {BkX!r}")
    q = C_X / BkX
    return k * k / math.pi * q * (4 * q + 5 + 1 / (2 * k)) + k / (2 * math.pi)


def _passes(lhs, rhs):
    return lhs <= rhs + TOL.bound_rel * abs(rhs)


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    passed: bool
    inputs: dict
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self):
        return {"check": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "passed": self.passed, "inputs": self.inputs, "details": self.details}


def _inputs(z, k, elems: ElementSet, r_X):
    return {"z": [z.x, z.y], "k": k, "r_X": r_X, "r_X_is_upper_bound": True,
            "C_X": constant_CX(k, r_X), "C_X_at_half_r_X": constant_CX(k, r_X / 2),
            "max_word_length": elems.max_word_length, "n_terms": len(elems),
            "displacement_cutoff": elems.displacement_cutoff}


def cosh_sum(z, k, elems: ElementSet) -> float:
    """(2k-1)/(4pi) * sum over elems of cosh^(-2k)(d_H(z, g z)/2), from distances."""
    z = as_point(z)
    d = displacement_array(elems.matrices, z)
    terms = np.exp(-2 * k * np.log(np.cosh(d / 2)))
    return kernel_prefactor(k) * math.fsum(terms)


def kernel_upper_chain(z, k, elems: ElementSet, r_X, sums=None) -> BoundReport:
    """B_k^X(z) <= (2k-1)/(4pi) sum cosh^(-2k)(d/2) <= C_X, both links checked."""
    z = as_point(z)
    k = check_weight(k)
    s = sums if sums is not None else series_sums(z, k, elems)
    bkx = bergman_kernel_X(z, k, elems, s)
    middle = cosh_sum(z, k, elems)
    cx = constant_CX(k, r_X)
    link1, link2 = _passes(bkx.real, middle), _passes(middle, cx)
    return BoundReport(
        "kernel_upper_chain", bkx.real, cx, link1 and link2, _inputs(z, k, elems, r_X),
        {"BkX": bkx.real, "middle": middle, "middle_from_series": kernel_prefactor(k) * s.abs_sum,
         "link1_passed": link1, "link1_slack": middle - bkx.real,
         "link2_passed": link2, "link2_slack": cx - middle,
         "link2_passed_at_half_r_X": _passes(middle, constant_CX(k, r_X / 2))})


def check_theorem1(z, k, elems: ElementSet, r_X, sums=None) -> BoundReport:
    """|mu_ber / mu_hyp| against the explicit Bergman-metric bound."""
    z = as_point(z)
    k = check_weight(k)
    s = sums if sums is not None else series_sums(z, k, elems)
    ratio = ratio_ber_hyp(z, k, elems, s)
    bkx = bergman_kernel_X(z, k, elems, s).real
    cx = constant_CX(k, r_X)
    rhs = theorem1_rhs(k, cx, bkx)
    inputs = _inputs(z, k, elems, r_X)
    return BoundReport("theorem1", abs(ratio), rhs, _passes(abs(ratio), rhs), inputs,
                       {"ratio": ratio, "BkX": bkx,
                        "rhs_at_half_r_X": theorem1_rhs(k, inputs["C_X_at_half_r_X"], bkx)})


def _elems_for(src, z, k):
    if isinstance(src, ElementSet):
        return src
    if isinstance(src, dict):
        return src[k]
    return src(z)


def _check_increasing(k_list):
    ks = [check_weight(k) for k in k_list]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise InvalidWeight(f"k list must be strictly increasing, got {ks}")
    return ks


def corollary1_scan(z, k_list, elems) -> dict:
    """(1/k^2) |mu_ber / mu_hyp| per k against 26/pi.

    ``elems`` is an ElementSet, a dict keyed by k, or a callable of z.
    ``threshold`` is the smallest k from which every later value is below.
    """
    z = as_point(z)
    rows = []
    for k in _check_increasing(k_list):
        v = abs(ratio_ber_hyp(z, k, _elems_for(elems, z, k))) / (k * k)
        rows.append({"k": k, "value": v, "bound": COROLLARY_BOUND, "below": v <= COROLLARY_BOUND})
    threshold = None
    for row in reversed(rows):
        if not row["below"]:
            break
        threshold = row["k"]
    return {"z": [z.x, z.y], "rows": rows, "threshold": threshold,
            "below_at_largest_k": bool(rows) and rows[-1]["below"]}


def asymptotic_kernel_check(z, k_list, elems) -> list:
    """|2 pi B_k^X(z) / k - 1| per k; the identity term alone gives 1/(2k)."""
    z = as_point(z)
    rows = []
    for k in _check_increasing(k_list):
        e = _elems_for(elems, z, k)
        s = series_sums(z, k, e)
        bkx = bergman_kernel_X(z, k, e, s).real
        others = s.abs_sum - 1.0  # sum over g != Id of cosh^(-2k)(d/2)
        rows.append({"k": k, "BkX": bkx, "deviation": abs(2 * math.pi * bkx / k - 1),
                     "identity_deviation": 1 / (2 * k),
                     "excess_bound": 1 / (2 * k) + others * (2 * k - 1) / (2 * k)})
    return rows
