import math

import mpmath
import pytest

from conftest import SAMPLES, ball10, bolza
from hypbergman.bounds import (COROLLARY_BOUND, asymptotic_kernel_check, check_theorem1,
                               constant_CX, corollary1_scan, cosh_sum, kernel_upper_chain,
                               theorem1_rhs)
from hypbergman.errors import DegenerateKernel, InvalidWeight
from hypbergman.groups import enumerate_elements, injectivity_radius
from hypbergman.hyperbolic import HPoint
from hypbergman.kernel import bergman_kernel_X, series_sums

I = HPoint(0, 1)
ID = enumerate_elements(bolza(), 0)
R_X = injectivity_radius(bolza(), [I], 8).r_upper


def mp_CX(k, r):
    mpmath.mp.dps = 50
    k, r = mpmath.mpf(k), mpmath.mpf(r)
    c4, c2, s4 = mpmath.cosh(r / 4), mpmath.cosh(r / 2), mpmath.sinh(r / 4)
    head = (2 * k - 1) / (4 * mpmath.pi) * (2 + 16 / c4 ** (2 * k - 4) + 8 / c2 ** (2 * k - 3))
    tail = (2 * k - 1) / (2 * mpmath.pi * s4 ** 2) * (
        1 / ((2 * k - 2) * c2 ** (2 * k - 3)) + 1 / ((k - 2) * c2 ** (2 * k - 4)))
    return head + tail


def mp_rhs(k, C, B):
    mpmath.mp.dps = 50
    k, q = mpmath.mpf(k), mpmath.mpf(C) / mpmath.mpf(B)
    return k ** 2 / mpmath.pi * q * (4 * q + 5 + 1 / (2 * k)) + k / (2 * mpmath.pi)


def test_cx_against_high_precision():
    assert constant_CX(3, 3.0571) == pytest.approx(float(mp_CX(3, 3.0571)), rel=1e-12)


def test_cx_large_radius_limit():
    for k in (3, 7, 20):
        assert constant_CX(k, 1e3) == pytest.approx((2 * k - 1) / (2 * math.pi), rel=1e-12)
        vals = [constant_CX(k, r) for r in (2.0, 4.0, 8.0, 16.0, 32.0)]
        # approaches the limit from above; strictly until it rounds to it
        assert all(v >= (2 * k - 1) / (2 * math.pi) for v in vals)
        assert vals[0] > (2 * k - 1) / (2 * math.pi)
        assert all(b <= a for a, b in zip(vals, vals[1:])) and vals[1] < vals[0]


def test_cx_rejects_low_weight():
    with pytest.raises(InvalidWeight):
        constant_CX(2, 3.0)


def test_theorem1_rhs_examples():
    for k in (3, 5, 11):
        C = constant_CX(k, R_X)
        assert theorem1_rhs(k, C, C) == pytest.approx(
            k * k / math.pi * (9 + 1 / (2 * k)) + k / (2 * math.pi), rel=1e-14)
        rs = [theorem1_rhs(k, C * q, C) for q in (0.5, 1, 2, 4)]
        assert all(b > a for a, b in zip(rs, rs[1:]))
    B = bergman_kernel_X(I, 3, ball10(I)).real
    C = constant_CX(3, R_X)
    assert theorem1_rhs(3, C, B) == pytest.approx(float(mp_rhs(3, C, B)), rel=1e-12)
    with pytest.raises(DegenerateKernel):
        theorem1_rhs(3, C, 0.0)


def test_identity_chain_is_tight():
    for k in (3, 9):
        rep = kernel_upper_chain(I, k, ID, R_X)
        assert rep.passed
        assert rep.details["link1_slack"] == 0
        assert rep.details["middle"] == pytest.approx((2 * k - 1) / (4 * math.pi), rel=1e-15)
        t = check_theorem1(HPoint(0.3, 2.0), k, ID, R_X)
        assert t.passed and t.lhs == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("z", SAMPLES)
def test_chain_on_bolza(z):
    e = ball10(z)
    for k in (3, 6, 12):
        rep = kernel_upper_chain(z, k, e, R_X)
        assert rep.passed and rep.details["link1_slack"] > 0 and rep.details["link2_slack"] > 0
        assert rep.details["link1_slack"] >= -1e-12 and rep.details["link2_slack"] >= -1e-12
        # the cosh-sum equals the series' absolute term sum
        mid = cosh_sum(z, k, e)
        assert rep.details["middle_from_series"] == pytest.approx(mid, rel=1e-10)
        assert check_theorem1(z, k, e, R_X).passed


def test_report_serialisation():
    rep = check_theorem1(I, 4, ball10(I), R_X).to_dict()
    assert rep["inputs"]["r_X_is_upper_bound"] is True
    assert rep["inputs"]["C_X_at_half_r_X"] > rep["inputs"]["C_X"]
    assert rep["slack"] == pytest.approx(rep["rhs"] - rep["lhs"])
    assert rep["inputs"]["max_word_length"] == 10


def test_corollary1_scan():
    assert COROLLARY_BOUND == pytest.approx(8.2760, abs=1e-4)
    s = corollary1_scan(I, [3, 4, 5], ID)
    assert all(r["value"] == pytest.approx(0, abs=1e-12) for r in s["rows"])
    assert s["below_at_largest_k"] and s["threshold"] == 3
    s = corollary1_scan(I, list(range(8, 25)), ball10(I))
    assert s["below_at_largest_k"] and s["threshold"] is not None
    with pytest.raises(InvalidWeight):
        corollary1_scan(I, [5, 4], ID)


def test_asymptotic_identity_and_bolza():
    rows = asymptotic_kernel_check(HPoint(0.2, 3.0), [3, 10, 24], ID)
    for r in rows:
        assert r["deviation"] == pytest.approx(1 / (2 * r["k"]), rel=1e-13)
    rows = asymptotic_kernel_check(I, list(range(8, 25)), ball10(I))
    for r in rows:
        assert r["deviation"] <= r["excess_bound"] + 1e-15
    devs = [r["deviation"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
    k16 = next(r for r in rows if r["k"] == 16)
    s = series_sums(I, 16, ball10(I))
    assert k16["excess_bound"] == pytest.approx(1 / 32 + (s.abs_sum - 1) * 31 / 32, rel=1e-12)
