"""Pure numpy shell sums for the automorphic kernel series (fallback backend).

For each element (a, b; c, d) and z = x + iy put

    Q = (z - g zbar)(c zbar + d) = c|z|^2 + d z - a zbar - b,   P = conj(Q),
    U = (2iy / Q)^(2k),   V = conj(U).

Every sum is returned multiplied by (2y)^(2k), which keeps |U| = cosh^(-2k)
of half the displacement of z, so nothing overflows:

    column 0:  U                                  (kernel series)
    column 1:  -2k U (c zbar + d) / Q             (d/dz)
    column 2:  -2k V (c z + d) / P                (d/dzbar)
    column 3:  -2k(2k+1) V / P^2 + 4 c k^2 V / P  (d^2/dz dzbar)

plus the per-shell sum of |U|.  Shell totals use ``math.fsum``.
"""
import math

import numpy as np

BACKEND = "python"


def _cpow(u, n):
    r = np.ones_like(u)
    while n > 0:
        if n & 1:
            r = r * u
        u = u * u
        n >>= 1
    return r


def _cpow_log(u, n):
    m = np.abs(u)
    t = np.angle(u)
    with np.errstate(divide="ignore"):
        r = np.exp(n * np.log(m))
    return r * np.cos(n * t) + 1j * (r * np.sin(n * t))


def series_shells(m, shells, x, y, k):
    m = np.asarray(m, dtype=float)
    a, b, c, d = m[:, 0], m[:, 1], m[:, 2], m[:, 3]
    z = complex(x, y)
    zb = z.conjugate()
    zz = x * x + y * y
    Q = c * zz + d * z - a * zb - b
    P = np.conj(Q)
    u = 2j * y / Q
    U = _cpow_log(u, 2 * k) if k >= 64 else _cpow(u, 2 * k)
    V = np.conj(U)
    terms = (
        U,
        -2.0 * k * U * (c * zb + d) / Q,
        -2.0 * k * V * (c * z + d) / P,
        -2.0 * k * (2.0 * k + 1.0) * V / (P * P) + 4.0 * c * k * k * V / P,
    )
    mag = np.abs(U)
    ns = len(shells) - 1
    out = np.zeros((ns, 4), dtype=complex)
    absum = np.zeros(ns)
    for s in range(ns):
        lo, hi = int(shells[s]), int(shells[s + 1])
        for j, t in enumerate(terms):
            out[s, j] = complex(math.fsum(t[lo:hi].real), math.fsum(t[lo:hi].imag))
        absum[s] = math.fsum(mag[lo:hi])
    return out, absum
