"""Univariate Taylor jets for exact pointwise derivatives of closed-form profiles."""
from __future__ import annotations

import numpy as np

from . import _taylor


class Jet:
    """Truncated Taylor expansion f(t0 + e) = sum c[k] e^k at one base point.

    ``c`` may carry trailing axes for vectorized evaluation over many base points.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @classmethod
    def variable(cls, t0, order: int):
        t0 = np.asarray(t0, dtype=float)
        c = np.zeros((order + 1,) + t0.shape)
        c[0] = t0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def const(cls, value, order: int, shape=()):
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self):
        return self.c[0]

    def deriv(self, k: int = 1):
        """k-th derivative at the base point."""
        return self.c[k] * float(np.prod(np.arange(1, k + 1)))

    def derivative(self) -> "Jet":
        return Jet(_taylor.derivative(self.c))

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other.c
        c = np.zeros_like(self.c)
        c[0] = other
        return c

    def __add__(self, other):
        o = self._coerce(other)
        K = min(self.c.shape[0], o.shape[0])
        return Jet(self.c[:K] + o[:K])

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(_taylor.mul(self.c, other.c))
        return Jet(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return Jet(_taylor.div(self.c, other.c))
        return Jet(self.c / other)

    def __rtruediv__(self, other):
        return Jet(_taylor.div(self._coerce(other), self.c))

    def __pow__(self, p):
        return Jet(_taylor.power(self.c, float(p)))


def exp(a: Jet) -> Jet:
    return Jet(_taylor.exp(a.c))


def log(a: Jet) -> Jet:
    return Jet(_taylor.log(a.c))


def sqrt(a: Jet) -> Jet:
    return a ** 0.5


def cosh(a: Jet) -> Jet:
    e, m = exp(a), exp(-a)
    return 0.5 * (e + m)


def sinh(a: Jet) -> Jet:
    e, m = exp(a), exp(-a)
    return 0.5 * (e - m)


def tanh(a: Jet) -> Jet:
    return sinh(a) / cosh(a)
