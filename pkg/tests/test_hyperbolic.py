import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypbergman.errors import ValidationError
from hypbergman.hyperbolic import (HPoint, MobiusElement, canonical_sign_array, cocycle,
                                   cosh_half_sq, displacement_array, hyp_distance,
                                   hyp_metric_density, mobius_apply)

I = HPoint(0, 1)
S = MobiusElement(0, -1, 1, 0)
T = MobiusElement(1, 1, 0, 1)

coord = st.floats(-5, 5)
height = st.floats(0.05, 5)
points = st.builds(HPoint, coord, height)


@st.composite
def elements(draw):
    a, b, c = draw(st.floats(-3, 3)), draw(st.floats(-3, 3)), draw(st.floats(-3, 3))
    if abs(a) < 0.2:
        a = 0.2 if a >= 0 else -0.2
    return MobiusElement(a, b, c, (1 + b * c) / a)


def test_hpoint_rejects_lower_half_plane():
    for y in (0.0, -1.0, math.nan):
        with pytest.raises(ValidationError):
            HPoint(0.3, y)


def test_mobius_det_and_sign():
    with pytest.raises(ValidationError):
        MobiusElement(1, 1, 1, 1)
    m = MobiusElement(-1, 0, 0, -1)
    assert m.entries == (1, 0, 0, 1)
    assert MobiusElement(0, 1, -1, 0).entries == (0, 1, -1, 0)
    assert MobiusElement(0, -1, 1, 0).entries == (0, 1, -1, 0)


def test_canonical_sign_array_matches_scalar():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(50, 4))
    m[:10, 0] = 0.0
    out = canonical_sign_array(m)
    for row in out:
        lead = row[np.abs(row) > 1e-12][0]
        assert lead > 0


@pytest.mark.parametrize("g, z, w", [
    (MobiusElement.identity(), I, I),
    (S, I, I),
    (T, I, HPoint(1, 1)),
])
def test_mobius_apply_examples(g, z, w):
    out = mobius_apply(g, z)
    assert out.x == pytest.approx(w.x, abs=1e-15) and out.y == pytest.approx(w.y)


def test_cocycle_examples():
    assert cocycle(MobiusElement.identity(), HPoint(0.3, 2)) == 1
    assert cocycle(S, I) == pytest.approx(1j)  # S is stored as (0,1;-1,0), so the sign flips
    assert cocycle(T, HPoint(0, 2)) == 1


def test_distance_examples():
    assert hyp_distance(I, I) == 0
    assert hyp_distance(I, HPoint(0, 2)) == pytest.approx(math.log(2), rel=1e-15)
    assert cosh_half_sq(I, HPoint(0, 2)) == pytest.approx(9 / 8)
    ref = float(2 * mpmath.acosh(mpmath.sqrt(5) / 2))
    assert hyp_distance(I, HPoint(1, 1)) == pytest.approx(ref, rel=1e-15)
    assert ref == pytest.approx(0.9624237, abs=1e-7)


def test_metric_density_examples():
    assert hyp_metric_density(I) == 1
    assert hyp_metric_density(HPoint(0, 2)) == 0.25
    for x in (-3.0, 0.0, 7.5):
        assert hyp_metric_density(HPoint(x, 0.5)) == 4


def test_displacement_array_matches_scalar():
    g = [S, T, MobiusElement(2, 1, 1, 1)]
    m = np.array([h.entries for h in g])
    z = HPoint(0.2, 0.7)
    ref = [hyp_distance(z, mobius_apply(h, z)) for h in g]
    assert np.allclose(displacement_array(m, z), ref, rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(points, points, points)
def test_distance_is_a_metric(z, w, u):
    d = hyp_distance
    assert d(z, w) >= 0
    assert d(z, w) == pytest.approx(d(w, z), rel=1e-12, abs=1e-12)
    assert d(z, u) <= d(z, w) + d(w, u) + 1e-12 * (1 + d(z, w) + d(w, u))


@settings(max_examples=200, deadline=None)
@given(points, points)
def test_cosh_identity(z, w):
    lhs = math.cosh(hyp_distance(z, w) / 2) ** 2 * 4 * z.y * w.y
    rhs = abs(z.z - w.z.conjugate()) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(elements(), points, points)
def test_distance_is_isometry_invariant(g, z, w):
    gz, gw = mobius_apply(g, z), mobius_apply(g, w)
    assert hyp_distance(gz, gw) == pytest.approx(hyp_distance(z, w), rel=1e-10, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(elements(), elements(), points)
def test_apply_respects_composition(g, h, z):
    a = mobius_apply(g @ h, z)
    b = mobius_apply(g, mobius_apply(h, z))
    assert hyp_distance(a, b) <= 1e-10 * (1 + abs(a.z))
