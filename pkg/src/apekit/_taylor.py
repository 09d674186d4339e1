"""Truncated Taylor-coefficient recurrences.

Every routine takes arrays whose axis 0 indexes the power of the expansion
variable; trailing axes are broadcast elementwise.  Both :class:`~apekit.jets.Jet`
(one real point) and the field-valued series in :mod:`apekit.series` are built
on these.
"""
from __future__ import annotations

import numpy as np


def mul(a, b):
    """Cauchy product truncated at the shorter operand."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    K = min(a.shape[0], b.shape[0])
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((K,) + shape)
    for k in range(K):
        for j in range(k + 1):
            out[k] += a[j] * b[k - j]
    return out


def div(a, b):
    """Quotient a/b; requires b[0] nonzero everywhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    K = min(a.shape[0], b.shape[0])
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    q = np.zeros((K,) + shape)
    for k in range(K):
        acc = np.broadcast_to(a[k], shape).copy()
        for j in range(1, k + 1):
            acc -= b[j] * q[k - j]
        q[k] = acc / b[0]
    return q


def exp(a):
    a = np.asarray(a, dtype=float)
    K = a.shape[0]
    e = np.zeros_like(a)
    e[0] = np.exp(a[0])
    for k in range(1, K):
        acc = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc += j * a[j] * e[k - j]
        e[k] = acc / k
    return e


def log(a):
    a = np.asarray(a, dtype=float)
    K = a.shape[0]
    out = np.zeros_like(a)
    out[0] = np.log(a[0])
    for k in range(1, K):
        acc = a[k].copy()
        for j in range(1, k):
            acc -= j * out[j] * a[k - j] / k
        out[k] = acc / a[0]
    return out


def power(a, p: float):
    """a**p for real p; a[0] must be positive (or p a non-negative integer)."""
    a = np.asarray(a, dtype=float)
    K = a.shape[0]
    y = np.zeros_like(a)
    y[0] = a[0] ** p
    for k in range(1, K):
        acc = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc += ((p + 1.0) * j - k) * a[j] * y[k - j]
        y[k] = acc / (k * a[0])
    return y


def derivative(a):
    """Coefficients of d/dt; one order shorter."""
    a = np.asarray(a, dtype=float)
    k = np.arange(1, a.shape[0]).reshape((-1,) + (1,) * (a.ndim - 1))
    return a[1:] * k


def antiderivative(a):
    """Coefficients of the integral from 0; one order longer."""
    a = np.asarray(a, dtype=float)
    out = np.zeros((a.shape[0] + 1,) + a.shape[1:])
    k = np.arange(1, a.shape[0] + 1).reshape((-1,) + (1,) * (a.ndim - 1))
    out[1:] = a / k
    return out


def evaluate(a, t):
    """Horner evaluation at t (scalar or broadcastable array)."""
    a = np.asarray(a, dtype=float)
    out = np.zeros(np.broadcast_shapes(a.shape[1:], np.shape(t)))
    for c in a[::-1]:
        out = out * t + c
    return out
