"""Diagonal warped-product charts q(s)^2 ds^2 + sum f_i(s)^2 dtheta_i^2 and their curvature.

Derivatives are taken with Taylor jets in the chart coordinate ``s`` and
converted to arclength derivatives with D = (1/q) d/ds.  All tensors are
reported in the orthonormal frame (e_s, e_1, ..., e_{n-1}), where the Ricci
tensor of a warped product is diagonal:

    Ric_ss = -sum_i f_i''/f_i
    Ric_ii = -f_i''/f_i - (f_i'/f_i) sum_{j != i} f_j'/f_j

At an axis (a point where one warp vanishes linearly, the others being even)
the singular quotients are replaced by their limits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import jets
from .jets import Jet

JET_ORDER = 4


@dataclass(frozen=True)
class RadialChart:
    """Radially symmetric metric on an interval times a torus.

    ``warps(s)`` maps a Jet to the list of warp Jets, ``q(s)`` to the radial
    line element factor (None means arclength), ``lapse(s)`` to the optional
    static potential.  ``axis`` is the index of the warp that closes off at
    ``domain[0]`` (None when no warp collapses).  On x-charts ``compact(x)``
    may return the pole-free pair ([x f_i], x N), which keeps finite-x
    evaluations near x = 0 free of cancellation.
    """

    n: int
    coordinate: str
    warps: Callable[[Jet], list]
    domain: tuple
    q: Optional[Callable[[Jet], Jet]] = None
    lapse: Optional[Callable[[Jet], Jet]] = None
    axis: Optional[int] = None
    periods: tuple = ()
    compact: Optional[Callable[[Jet], tuple]] = None

    def contains(self, s) -> bool:
        lo, hi = self.domain
        if self.axis is not None and s == lo:
            return True
        return bool(lo < s < hi)

    def metric_values(self, s):
        """(q(s), [f_i(s)]) as floats."""
        S = Jet.variable(float(s), 0)
        q = 1.0 if self.q is None else float(self.q(S).value)
        return q, [float(f.value) for f in self.warps(S)]

    def with_lapse(self, lapse):
        return RadialChart(self.n, self.coordinate, self.warps, self.domain, self.q, lapse, self.axis, self.periods)  # compact form dropped


@dataclass(frozen=True)
class RadialCurvature:
    scalar: float
    ricci: np.ndarray  # orthonormal-frame eigenvalues: radial first, then each warp direction


@dataclass(frozen=True)
class FrameQuotients:
    """Arclength-derivative quotients of the warps at one point."""

    ff: np.ndarray     # f_i''/f_i
    cross: np.ndarray  # (f_i'/f_i)(f_j'/f_j), zero diagonal
    L: np.ndarray      # f_i'/f_i (inf on the collapsing warp at an axis)
    on_axis: bool


def _arclength_derivative(F: Jet, Q) -> Jet:
    d = F.derivative()
    return d if Q is None else d / Jet(Q.c[: d.c.shape[0]])


def _jets_at(chart: RadialChart, s, order=JET_ORDER):
    S = Jet.variable(float(s), order)
    Q = None if chart.q is None else chart.q(S)
    F = list(chart.warps(S))
    return S, Q, F


def _check_point(chart: RadialChart, s):
    if not np.isfinite(s) or not chart.contains(s):
        raise ValueError(f"point {s} outside chart domain {chart.domain}")


def frame_quotients(chart: RadialChart, s) -> FrameQuotients:
    _check_point(chart, s)
    _, Q, F = _jets_at(chart, s)
    F1 = [_arclength_derivative(f, Q) for f in F]
    F2 = [_arclength_derivative(f1, Q) for f1 in F1]
    m = len(F)
    on_axis = chart.axis is not None and s == chart.domain[0]
    ff = np.empty(m)
    L = np.empty(m)
    cross = np.zeros((m, m))
    if not on_axis:
        for i in range(m):
            f0 = F[i].value
            ff[i] = F2[i].value / f0
            L[i] = F1[i].value / f0
        cross = np.outer(L, L)
        np.fill_diagonal(cross, 0.0)
        return FrameQuotients(ff, cross, L, False)
    c = chart.axis
    if chart.q is not None:
        raise ValueError("axis limits are only available in arclength charts")
    for i in range(m):
        if i == c:
            ff[i] = F2[i].c[1] / F[i].c[1]
            L[i] = np.inf
        else:
            ff[i] = F2[i].value / F[i].value
            L[i] = F1[i].value / F[i].value
    for j in range(m):
        if j == c:
            continue
        Z = F1[j] / F[j]
        cross[c, j] = cross[j, c] = Z.c[1]
        for k in range(m):
            if k != c and k != j:
                cross[j, k] = L[j] * L[k]
    return FrameQuotients(ff, cross, L, True)


def radial_curvature(chart: RadialChart, s) -> RadialCurvature:
    """Scalar curvature and orthonormal Ricci eigenvalues at chart coordinate ``s``."""
    fq = frame_quotients(chart, s)
    ric_tan = -fq.ff - fq.cross.sum(axis=1)
    ric = np.concatenate([[-fq.ff.sum()], ric_tan])
    return RadialCurvature(float(ric.sum()), ric)


@dataclass(frozen=True)
class RadialFunctionData:
    value: float
    d1: float           # arclength derivative
    hessian: np.ndarray  # orthonormal diagonal: radial, then warp directions
    laplacian: float


def radial_function_data(chart: RadialChart, s, func: Callable[[Jet], Jet]) -> RadialFunctionData:
    """Value, Hessian and Laplacian of a function of the radial coordinate."""
    fq = frame_quotients(chart, s)
    _, Q, _ = _jets_at(chart, s)
    S = Jet.variable(float(s), JET_ORDER)
    U = func(S)
    U1 = _arclength_derivative(U, Q)
    U2 = _arclength_derivative(U1, Q)
    tang = np.empty(len(fq.L))
    for i, Li in enumerate(fq.L):
        tang[i] = U1.c[1] if (fq.on_axis and i == chart.axis) else U1.value * Li
    hess = np.concatenate([[U2.value], tang])
    return RadialFunctionData(float(U.value), float(U1.value), hess, float(hess.sum()))


def hyperbolic_chart(n: int) -> RadialChart:
    """Constant-curvature model with every warp equal to e^s."""
    return RadialChart(n, "rho", lambda s: [jets.exp(s)] * (n - 1), (-np.inf, np.inf))


def model_x_chart(n: int) -> RadialChart:
    """x^-2 (dx^2 + flat), with the static potential 1/x."""
    return RadialChart(n, "x", lambda x: [1.0 / x] * (n - 1), (0.0, np.inf),
                       q=lambda x: 1.0 / x, lapse=lambda x: 1.0 / x)
