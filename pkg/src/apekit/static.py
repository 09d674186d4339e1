"""Static Einstein residuals on radial charts, the operator L*, indicial data and the static lapse expansion.

With lapse N the static system on an n-manifold is

    N Ric = Hess N - n N g,    Delta N = n N,

equivalently L*(N) := Hess N - g Delta N - N Ric = 0, or in log form with
N = e^u:  Ric - du du - Hess u + n g = 0  and  Delta u + |du|^2 - n = 0.
All tensors are orthonormal-frame diagonals (radial slot first).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import sympy as sp

from . import jets
from .curvature import NormalFormMetric
from .jets import Jet
from .radial import RadialChart, radial_curvature, radial_function_data
from .series import ScalarSeries
from .torus import ScalarField


def _horner_jet(coeffs, x: Jet) -> Jet:
    out = Jet.const(coeffs[-1], x.order)
    for c in coeffs[-2::-1]:
        out = out * x + float(c)
    return out


def chart_from_normal_form(m: NormalFormMetric) -> RadialChart:
    """x-chart of a translation-invariant normal-form metric with diagonal h_x."""
    c = m.h.coeffs
    if not m.h.is_constant:
        raise ValueError("only translation-invariant normal-form metrics have a radial chart")
    off = c - np.einsum("kii->ki", c)[..., None] * np.eye(c.shape[-1])
    if np.max(np.abs(off)) > 1e-14:
        raise ValueError("only diagonal normal-form metrics have a radial chart")
    diag = [c[:, i, i] for i in range(c.shape[-1])]

    def warps(x):
        return [jets.sqrt(_horner_jet(d, x)) / x for d in diag]

    return RadialChart(m.n, "x", warps, (0.0, np.inf), q=lambda x: 1.0 / x, periods=m.grid.periods)


def lapse_from_series(xN: ScalarSeries) -> Callable[[Jet], Jet]:
    """N = (x N series)/x as a jet map."""
    if not xN.is_constant:
        raise ValueError("radial lapse must be translation invariant")
    c = np.asarray(xN.coeffs)
    return lambda x: _horner_jet(c, x) / x


@dataclass(frozen=True)
class StaticPair:
    """A metric with a candidate static potential.

    ``lapse`` is a jet map in the chart coordinate, or a ScalarSeries of x*N
    for normal-form metrics.  ``log_potential`` optionally gives u = log N
    directly (used by the log-form residuals).
    """

    metric: Union[RadialChart, NormalFormMetric]
    lapse: Union[Callable[[Jet], Jet], ScalarSeries, None] = None
    log_potential: Optional[Callable[[Jet], Jet]] = None
    normalized: bool = False

    def __post_init__(self):
        if self.lapse is None and self.log_potential is None:
            lapse = getattr(self.metric, "lapse", None)
            if lapse is None:
                raise ValueError("missing lapse data")
            object.__setattr__(self, "lapse", lapse)
        if isinstance(self.lapse, ScalarSeries) and self.normalized:
            lead = float(np.max(np.abs(np.asarray(self.lapse.coeffs[0]) - 1.0)))
            if lead > 1e-10:
                raise ValueError(f"x N does not tend to 1 at conformal infinity (offset {lead:.3e})")

    @property
    def chart(self) -> RadialChart:
        m = self.metric
        return chart_from_normal_form(m) if isinstance(m, NormalFormMetric) else m

    @property
    def lapse_map(self) -> Callable[[Jet], Jet]:
        if self.lapse is None:
            return lambda s: jets.exp(self.log_potential(s))
        if isinstance(self.lapse, ScalarSeries):
            return lapse_from_series(self.lapse)
        return self.lapse

    @property
    def log_map(self) -> Callable[[Jet], Jet]:
        if self.log_potential is not None:
            return self.log_potential
        N = self.lapse_map
        return lambda s: jets.log(N(s))


@dataclass(frozen=True)
class StaticResidual:
    ric_form: np.ndarray   # N Ric - Hess N + n N g
    trace_form: float      # Delta N - n N
    combined: np.ndarray   # Hess N - g Delta N - N Ric

    @property
    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.ric_form)), abs(self.trace_form), np.max(np.abs(self.combined))))


def static_residual(pair: StaticPair, point) -> StaticResidual:
    chart = pair.chart
    fd = radial_function_data(chart, point, pair.lapse_map)
    if not fd.value > 0:
        raise ValueError(f"lapse is not positive at {point} (N = {fd.value})")
    ric = radial_curvature(chart, point).ricci
    n = chart.n
    N = fd.value
    t = N * ric - fd.hessian + n * N
    s = fd.laplacian - n * N
    c = fd.hessian - fd.laplacian - N * ric
    return StaticResidual(t, float(s), c)


def lstar_apply(metric: RadialChart, N: Callable[[Jet], Jet], point) -> np.ndarray:
    """Hess N - g Delta N - N Ric at ``point`` (orthonormal diagonal)."""
    fd = radial_function_data(metric, point, N)
    ric = radial_curvature(metric, point).ricci
    return fd.hessian - fd.laplacian - fd.value * ric


@dataclass(frozen=True)
class LogFormResidual:
    ric_form: np.ndarray  # Ric - du du - Hess u + n g
    trace_form: float     # Delta u + |du|^2 - n


def log_form_residual(metric: RadialChart, u: Callable[[Jet], Jet], point) -> LogFormResidual:
    fd = radial_function_data(metric, point, u)
    ric = radial_curvature(metric, point).ricci
    n = metric.n
    dudu = np.zeros_like(ric)
    dudu[0] = fd.d1 ** 2
    return LogFormResidual(ric - dudu - fd.hessian + n, float(fd.laplacian + fd.d1 ** 2 - n))


@dataclass(frozen=True)
class IndicialData:
    n: int
    s: sp.Symbol
    radial_symbol: sp.Expr      # coefficient on dx^2 (orthonormal)
    tangential_symbol: sp.Expr  # coefficient on each boundary direction
    trace_polynomial: sp.Expr
    roots: tuple


def indicial_data(n: int) -> IndicialData:
    """Leading symbol of x^-s P(x^s) on the hyperbolic model, computed symbolically."""
    s = sp.Symbol("s")
    x = sp.Symbol("x", positive=True)
    # g = x^-2 (dx^2 + flat): arclength derivative D = x d/dx, warp 1/x
    D = lambda f: sp.simplify(x * sp.diff(f, x))
    N = x ** s
    warp_log = sp.simplify(D(1 / x) * x)     # f'/f = -1
    ric = -(n - 1)
    hess_r = D(D(N))
    hess_t = D(N) * warp_log
    lap = hess_r + (n - 1) * hess_t
    rad = sp.factor(sp.simplify((hess_r - lap - N * ric) / N))
    tan = sp.factor(sp.simplify((hess_t - lap - N * ric) / N))
    trace = sp.factor(rad + (n - 1) * tan)
    roots = tuple(sorted(int(r) for r in sp.solve(trace, s)))
    return IndicialData(n, s, rad, tan, trace, roots)


def lapse_expansion(mu, n: int, lam: int = 0, K: int | None = None) -> ScalarSeries:
    """x*N = 1 + lam x^2/4 - (mu/2n) x^n for a static APE end; mu a real or a ScalarField."""
    K = n + 1 if K is None else K
    if K < n:
        raise ValueError("truncation order must reach x^n")
    grid = None
    if isinstance(mu, ScalarField):
        grid = mu.grid
        mu_v = mu.values
    else:
        mu_v = np.asarray(float(mu))
    c = np.zeros((K + 1,) + mu_v.shape)
    c[0] = 1.0
    c[2] = c[2] + lam / 4.0
    c[n] = c[n] - mu_v / (2.0 * n)
    return ScalarSeries(c, grid)


def lapse_coefficient(xN: ScalarSeries, power: int):
    """Coefficient of x^power in N from a series of x*N."""
    return xN.coeffs[power + 1]


@dataclass(frozen=True)
class HolographicEnergy:
    density: ScalarField
    lapse_coefficient: ScalarField  # the x^(n-1) coefficient of N, -density/(2n)


def holographic_energy(report) -> HolographicEnergy:
    """Mass aspect read as the boundary energy density of a static end."""
    mu = report.mu
    n = mu.grid.boundary_dim + 1
    return HolographicEnergy(mu, ScalarField(mu.grid, -mu.values / (2.0 * n)))
