import math

import mpmath
import numpy as np
import pytest

from conftest import GRID, SAMPLES, ball, ball10, bolza
from hypbergman import finite_diff as fd
from hypbergman.bounds import constant_CX
from hypbergman.errors import InvalidWeight, MissingIdentity
from hypbergman.groups import enumerate_elements, injectivity_radius
from hypbergman.hyperbolic import HPoint, displacement_array
from hypbergman.kernel import (bergman_kernel_X, bergman_metric_density, ratio_ber_hyp,
                               series_B, series_derivatives, series_sums, tail_estimate)

I = HPoint(0, 1)
ID = enumerate_elements(bolza(), 0)


def mp_series(z, k, elems):
    """Unnormalised kernel series summed term by term at 40 digits."""
    mpmath.mp.dps = 40
    zz = mpmath.mpc(z.x, z.y)
    tot = mpmath.mpc(0)
    for a, b, c, d in elems.matrices:
        a, b, c, d = (mpmath.mpf(float(v)) for v in (a, b, c, d))
        gz = (a * mpmath.conj(zz) + b) / (c * mpmath.conj(zz) + d)
        tot += mpmath.mpc(0, 1) ** (2 * k) / ((zz - gz) ** (2 * k) * (c * mpmath.conj(zz) + d) ** (2 * k))
    return complex(tot)


def test_identity_closed_forms():
    assert series_B(I, 3, ID).value == pytest.approx(1 / 64, rel=1e-15)
    assert series_B(HPoint(0, 2), 4, ID).value == pytest.approx(4.0 ** -8, rel=1e-15)
    assert bergman_kernel_X(I, 3, ID).value == pytest.approx(5 / (4 * math.pi), rel=1e-15)
    d = series_derivatives(I, 3, ID)
    assert d.dz == pytest.approx(0.046875j, rel=1e-15)
    assert d.dzbar == pytest.approx(-0.046875j, rel=1e-15)
    assert d.dzdzbar == pytest.approx(0.1640625, rel=1e-15)
    assert ratio_ber_hyp(HPoint(0.4, 0.3), 7, ID) == pytest.approx(0, abs=1e-12)
    assert bergman_metric_density(HPoint(-1, 2), 5, ID) == pytest.approx(0, abs=1e-12)


def test_rejects_bad_weight_and_missing_identity():
    for k in (2, 0, 3.5):
        with pytest.raises(InvalidWeight):
            series_B(I, k, ID)
    e = enumerate_elements(bolza(), 1)
    e.matrices = e.matrices[1:].copy()
    with pytest.raises(MissingIdentity):
        series_B(I, 3, e)


@pytest.mark.parametrize("k", [3, 8, 70])
def test_series_matches_high_precision_sum(k):
    z = HPoint(0.15, 0.85)
    e = ball(z, 12).restrict(2)
    ref = mp_series(z, k, e)
    assert series_B(z, k, e).value == pytest.approx(ref, rel=1e-12)


def test_converged_against_longer_words():
    v10 = series_B(I, 3, ball10(I)).value
    v14 = series_B(I, 3, enumerate_elements(bolza(), 14, prune=(I, 10.0))).value
    assert abs(v10 - v14) / abs(v14) <= 1e-10


def test_kernel_at_i_weight_8():
    k = 8
    e = ball10(I)
    v = bergman_kernel_X(I, k, e).value.real
    eps = v / ((2 * k - 1) / (4 * math.pi)) - 1
    d = displacement_array(e.matrices[1:], I)
    assert 0 < eps <= math.fsum(np.cosh(d / 2) ** (-2 * k))


@pytest.mark.parametrize("z", SAMPLES)
@pytest.mark.parametrize("k", [3, 5, 12])
def test_real_positive_and_conjugate(z, k):
    s = series_sums(z, k, ball10(z))
    assert s.B.real > 0 and abs(s.B.imag) <= 1e-10 * abs(s.B)
    assert abs(s.dzbar - s.dz.conjugate()) <= 1e-9 * abs(s.dz)
    assert abs(s.dzdzbar.imag) <= 1e-9 * abs(s.dzdzbar)
    assert bergman_kernel_X(z, k, ball10(z)).is_real_positive()


@pytest.mark.parametrize("z", SAMPLES[:3])
def test_derivatives_match_finite_differences(z):
    e = ball10(z)
    for k in (3, 6):
        f = lambda w: series_B(w, k, e).value
        d = series_derivatives(z, k, e)
        assert fd.rel_err(d.dz, fd.d_dz(f, z.z)) <= 1e-6
        assert fd.rel_err(d.dzbar, fd.d_dzbar(f, z.z)) <= 1e-6
        assert fd.rel_err(d.dzdzbar, fd.d2_dz_dzbar(f, z.z)) <= 1e-6


@pytest.mark.parametrize("z", SAMPLES[:3])
@pytest.mark.parametrize("k", [3, 4])
def test_metric_density_matches_log_laplacian(z, k):
    e = ball10(z)
    f = lambda w: math.log(bergman_kernel_X(w, k, e).value.real)
    ref = -fd.d2_dz_dzbar(f, z.z) / math.pi
    assert fd.rel_err(bergman_metric_density(z, k, e), ref) <= 1e-5


def test_gamma_invariance():
    rng = np.random.default_rng(1)
    short = enumerate_elements(bolza(), 3)
    for z in SAMPLES[:2]:
        e = ball10(z)
        v = bergman_kernel_X(z, 4, e).real
        for idx in rng.choice(np.arange(1, len(short)), 3, replace=False):
            g = short.matrices[idx]
            moved = e.conjugated(g)
            gz = moved.basepoint_used_for_pruning
            assert bergman_kernel_X(gz, 4, moved).real == pytest.approx(v, rel=1e-8)


def test_conjugated_ball_matches_direct_enumeration():
    z = HPoint(0.1, 0.9)
    g = bolza().generators[1]
    moved = ball(z, 12).restrict(6).conjugated(g)
    gz = moved.basepoint_used_for_pruning
    direct = enumerate_elements(bolza(), 8, prune=(gz, 6.0))
    d_direct = np.sort(displacement_array(direct.matrices, gz))
    d_moved = displacement_array(moved.matrices, gz)
    small = np.sort(d_moved[d_moved <= 6.0])
    assert np.allclose(small, d_direct[:len(small)], rtol=1e-9, atol=1e-9)
    for row in moved.matrices[d_moved <= 6.0]:
        assert direct.find(row, tol=1e-8) >= 0


def test_term_bound_chain():
    r = injectivity_radius(bolza(), [I], 8).r_upper
    for z in SAMPLES:
        e = ball10(z)
        for k in (3, 5):
            for n in range(k, k + 6):
                lhs = abs(series_B(z, n, e).value)
                assert lhs <= 4 * math.pi / (2 * k - 1) * constant_CX(k, r) * (2 * z.y) ** (-2 * n)


@pytest.mark.parametrize("z", SAMPLES)
def test_shell_decay(z):
    for k in (3, 8):
        mags = bergman_kernel_X(z, k, ball10(z)).shell_magnitudes
        tail = mags[-4:]
        assert all(b < a for a, b in zip(tail, tail[1:]))


def test_tail_estimate_rules():
    assert tail_estimate([1.0]) == (0.0, 0.0)
    assert tail_estimate([1.0, 0.1]) == (0.1, pytest.approx(0.01 / 0.9))
    assert tail_estimate([1.0, 0.9]) == (0.9, 0.9)
    assert tail_estimate([0.1, 0.2]) == (0.2, 0.2)


def test_ratio_stable_in_word_length():
    z = GRID[7]
    big = ball(z, 12)
    for k in (3, 6):
        a = ratio_ber_hyp(z, k, big.restrict(10))
        b = ratio_ber_hyp(z, k, big)
        assert abs(a - b) <= 1e-8 * abs(b)


def mp_ratio(z, k, elems):
    """k/(2pi) + (y^2/pi) Re(B_z B_zbar / B^2 - B_zzbar / B) at 120 digits, by direct differentiation."""
    mpmath.mp.dps = 120
    zz = mpmath.mpc(z.x, z.y)
    zb = mpmath.conj(zz)
    B = Bz = Bzb = Bzzb = mpmath.mpc(0)
    for a, b, c, d in elems.matrices:
        a, b, c, d = (mpmath.mpf(float(v)) for v in (a, b, c, d))
        Q = c * zz * zb + d * zz - a * zb - b
        T = mpmath.mpc(0, 1) ** (2 * k) / Q ** (2 * k)
        qz, qzb = c * zb + d, c * zz - a
        B += T
        Bz += -2 * k * T * qz / Q
        Bzb += -2 * k * T * qzb / Q
        Bzzb += 2 * k * (2 * k + 1) * T * qz * qzb / Q ** 2 - 2 * k * T * c / Q
    y = mpmath.mpf(z.y)
    corr = Bz * Bzb / B ** 2 - Bzzb / B
    return float(k / (2 * mpmath.pi) + y ** 2 / mpmath.pi * mpmath.re(corr))


@pytest.mark.parametrize("k", [3, 12, 24, 70])
def test_ratio_against_high_precision(k):
    z = HPoint(0.15, 0.85)
    e = ball(z, 12).restrict(3)
    ref = mp_ratio(z, k, e)
    assert ratio_ber_hyp(z, k, e) == pytest.approx(ref, rel=1e-9)
