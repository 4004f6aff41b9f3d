"""Upper half-plane primitives: points, PSL(2,R) elements, distance, density."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tolerances import TOL


@dataclass(frozen=True, order=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"non-finite point ({x}, {y})")
        if y <= 0.0:
            raise ValidationError(f"point ({x}, {y}) is not in the upper half-plane")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z) -> "HPoint":
        return cls(z.real, z.imag)


def as_point(p) -> HPoint:
    if isinstance(p, HPoint):
        return p
    if isinstance(p, (complex, float, int)):
        return HPoint.from_complex(complex(p))
    x, y = p
    return HPoint(x, y)


def canonical_sign(a, b, c, d, eps=None):
    """Flip (a,b,c,d) so the first entry exceeding ``eps`` in size is positive."""
    eps = TOL.sign if eps is None else eps
    for v in (a, b, c, d):
        if abs(v) > eps:
            if v < 0:
                return -a, -b, -c, -d
            break
    return a, b, c, d


def canonical_sign_array(m, eps=None):
    """Vectorized ``canonical_sign`` over rows of an (N, 4) array (copy)."""
    eps = TOL.sign if eps is None else eps
    m = np.array(m, dtype=float, copy=True)
    big = np.abs(m) > eps
    first = np.argmax(big, axis=1)
    lead = m[np.arange(len(m)), first]
    m[lead < 0] *= -1.0
    return m


@dataclass(frozen=True)
class MobiusElement:
    """Real unit-determinant matrix (a b; c d), stored up to sign."""
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not abs(det - 1.0) <= TOL.det:
            raise ValidationError(f"determinant {det!r} differs from 1 by more than {TOL.det}")
        a, b, c, d = canonical_sign(a, b, c, d)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v)

    @classmethod
    def identity(cls) -> "MobiusElement":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "MobiusElement") -> "MobiusElement":
        a, b, c, d = self.entries
        p, q, r, s = other.entries
        return _unchecked(a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)

    def inverse(self) -> "MobiusElement":
        return _unchecked(self.d, -self.b, -self.c, self.a)

    def is_identity(self, tol=None) -> bool:
        tol = TOL.dedup if tol is None else tol
        a, b, c, d = self.entries
        return abs(a - 1) <= tol and abs(b) <= tol and abs(c) <= tol and abs(d - 1) <= tol

    def close_to(self, other: "MobiusElement", tol=None) -> bool:
        tol = TOL.dedup if tol is None else tol
        return all(abs(u - v) <= tol for u, v in zip(self.entries, other.entries))


def _unchecked(a, b, c, d) -> MobiusElement:
    # products of valid elements drift off det=1 only by rounding; skip the check
    m = object.__new__(MobiusElement)
    a, b, c, d = canonical_sign(a, b, c, d)
    for name, v in zip("abcd", (a, b, c, d)):
        object.__setattr__(m, name, float(v))
    return m


def mobius_apply(g: MobiusElement, z) -> HPoint:
    z = as_point(z).z
    w = (g.a * z + g.b) / (g.c * z + g.d)
    return HPoint(w.real, w.imag)


def cocycle(g: MobiusElement, z) -> complex:
    """c*conj(z) + d, the automorphy denominator of the kernel series."""
    z = as_point(z).z
    return g.c * z.conjugate() + g.d


def cosh_half_sq(z, w) -> float:
    """cosh^2(d_H(z,w)/2) = |z - conj(w)|^2 / (4 y v)."""
    z, w = as_point(z), as_point(w)
    return abs(z.z - w.z.conjugate()) ** 2 / (4.0 * z.y * w.y)


def hyp_distance(z, w) -> float:
    # sinh^2(d/2) = cosh^2(d/2) - 1 = |z - w|^2 / (4 y v); asinh keeps
    # precision for nearby points where acosh(1 + tiny) would not
    z, w = as_point(z), as_point(w)
    s = abs(z.z - w.z) / (2.0 * math.sqrt(z.y * w.y))
    return 2.0 * math.asinh(s)


def hyp_metric_density(z) -> float:
    """Coefficient of dx dy in the Poincare metric, 1/y^2."""
    y = as_point(z).y
    return 1.0 / (y * y)


def displacement_array(m, z) -> np.ndarray:
    """d_H(z, g z) for every row (a, b, c, d) of ``m``."""
    z = as_point(z)
    zc = z.z
    a, b, c, d = (m[:, i] for i in range(4))
    w = (a * zc + b) / (c * zc + d)
    s = np.abs(zc - w) / (2.0 * np.sqrt(z.y * w.imag))
    return 2.0 * np.arcsinh(s)
