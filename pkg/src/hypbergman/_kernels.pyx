# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shell sums for the automorphic kernel series.

Mirrors ``_kernels_py.series_shells``; see that module for the quantities.
Accumulation is Neumaier-compensated per shell, in element order.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, log, atan2, cos, sin, hypot

cnp.import_array()

ctypedef double complex cplx

BACKEND = "cython"


cdef inline cplx cpow_int(cplx u, long n) noexcept nogil:
    cdef cplx r = 1.0
    while n > 0:
        if n & 1:
            r = r * u
        u = u * u
        n >>= 1
    return r


cdef inline cplx cpow_log(cplx u, long n) noexcept nogil:
    cdef double m = hypot(u.real, u.imag)
    cdef double t = atan2(u.imag, u.real)
    cdef double r
    if m == 0.0:
        return 0.0
    r = exp(n * log(m))
    return r * cos(n * t) + 1j * (r * sin(n * t))


cdef inline void neumaier(double *s, double *c, double v) noexcept nogil:
    cdef double t = s[0] + v
    if fabs(s[0]) >= fabs(v):
        c[0] += (s[0] - t) + v
    else:
        c[0] += (v - t) + s[0]
    s[0] = t


def series_shells(double[:, ::1] m, long[::1] shells, double x, double y, long k):
    cdef Py_ssize_t ns = shells.shape[0] - 1
    out = np.zeros((ns, 4), dtype=np.complex128)
    absum = np.zeros(ns, dtype=np.float64)
    cdef cplx[:, ::1] o = out
    cdef double[::1] ab = absum
    cdef double s[8]
    cdef double c[8]
    cdef double sa, ca
    cdef Py_ssize_t sh, i, j
    cdef double a, b, cc, d, zz = x * x + y * y
    cdef cplx z = x + 1j * y
    cdef cplx zb = x - 1j * y
    cdef cplx two_iy = 2j * y
    cdef cplx Q, P, U, V, tB, tdz, tdzb, tdd
    cdef long n = 2 * k
    cdef double kk = <double>k
    cdef bint use_log = k >= 64
    with nogil:
        for sh in range(ns):
            for j in range(8):
                s[j] = 0.0
                c[j] = 0.0
            sa = 0.0
            ca = 0.0
            for i in range(shells[sh], shells[sh + 1]):
                a = m[i, 0]
                b = m[i, 1]
                cc = m[i, 2]
                d = m[i, 3]
                # Q = (z - g zbar)(c zbar + d), P = conj(Q) = (zbar - g z)(c z + d)
                Q = cc * zz + d * z - a * zb - b
                P = Q.conjugate()
                if use_log:
                    U = cpow_log(two_iy / Q, n)
                else:
                    U = cpow_int(two_iy / Q, n)
                V = U.conjugate()
                tB = U
                tdz = -2.0 * kk * U * (cc * zb + d) / Q
                tdzb = -2.0 * kk * V * (cc * z + d) / P
                tdd = -2.0 * kk * (2.0 * kk + 1.0) * V / (P * P) + 4.0 * cc * kk * kk * V / P
                neumaier(&s[0], &c[0], tB.real)
                neumaier(&s[1], &c[1], tB.imag)
                neumaier(&s[2], &c[2], tdz.real)
                neumaier(&s[3], &c[3], tdz.imag)
                neumaier(&s[4], &c[4], tdzb.real)
                neumaier(&s[5], &c[5], tdzb.imag)
                neumaier(&s[6], &c[6], tdd.real)
                neumaier(&s[7], &c[7], tdd.imag)
                neumaier(&sa, &ca, hypot(U.real, U.imag))
            for j in range(4):
                o[sh, j] = (s[2 * j] + c[2 * j]) + 1j * (s[2 * j + 1] + c[2 * j + 1])
            ab[sh] = sa + ca
    return out, absum
