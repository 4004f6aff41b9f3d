"""Central finite differences with one Richardson step, for complex variables.

For f: C -> C and z = x + iy,

    d/dz    = (d/dx - i d/dy) / 2,
    d/dzbar = (d/dx + i d/dy) / 2,
    d^2/dz dzbar = (d^2/dx^2 + d^2/dy^2) / 4.
"""
FIRST_STEP = 1e-5
SECOND_STEP = 1e-3


def _richardson(rule, h):
    return (4.0 * rule(h / 2) - rule(h)) / 3.0


def _step(z, rel):
    return rel * max(1.0, abs(z))


def d_dx_dy(f, z, h=None):
    h = _step(z, FIRST_STEP) if h is None else h
    fx = _richardson(lambda s: (f(z + s) - f(z - s)) / (2 * s), h)
    fy = _richardson(lambda s: (f(z + 1j * s) - f(z - 1j * s)) / (2 * s), h)
    return fx, fy


def d_dz(f, z, h=None):
    fx, fy = d_dx_dy(f, z, h)
    return (fx - 1j * fy) / 2


def d_dzbar(f, z, h=None):
    fx, fy = d_dx_dy(f, z, h)
    return (fx + 1j * fy) / 2


def d2_dz_dzbar(f, z, h=None):
    h = _step(z, SECOND_STEP) if h is None else h

    def lap(s):
        return (f(z + s) + f(z - s) + f(z + 1j * s) + f(z - 1j * s) - 4 * f(z)) / (s * s)

    return _richardson(lap, h) / 4


def mixed_partial(f, x0, u, v, h):
    """d^2 f / du dv at real vector x0 along directions u, v (Richardson-refined)."""
    def rule(s):
        return (f(x0 + s * u + s * v) - f(x0 + s * u - s * v)
                - f(x0 - s * u + s * v) + f(x0 - s * u - s * v)) / (4 * s * s)
    return _richardson(rule, h)


def rel_err(a, b):
    """|a - b| / |b| with |b| = 0 falling back to absolute error."""
    den = abs(b)
    return abs(a - b) / den if den > 0 else abs(a - b)

