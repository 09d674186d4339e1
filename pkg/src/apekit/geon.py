"""Toroidal geons (time slices of the AdS soliton), their lapse, and closed-form expansion data.

The geon on R^2 x T^(n-2) is written in three radial coordinates:

* ``r``   in [1, inf):  dr^2/(r^2 (1 - r^-n)) + r^2 [(1 - r^-n) dxi^2 + sum dphi^2]
* ``rho`` in [0, inf):  drho^2 + cosh(n rho/2)^(4/n) [tanh(n rho/2)^2 dxi^2 + sum dphi^2]
* ``x``   in (0, 4^(1/n)): the special defining function x = 4^(1/n) e^-rho

with xi of period 4 pi/n so the metric closes smoothly at rho = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _taylor, jets
from .curvature import NormalFormMetric
from .radial import RadialChart
from .series import ScalarSeries, TensorSeries
from .torus import TorusGrid


@dataclass(frozen=True)
class GeonSpec:
    n: int
    periods: tuple
    xi_period: float = field(default=None)

    def __post_init__(self):
        periods = tuple(float(a) for a in self.periods)
        object.__setattr__(self, "periods", periods)
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if len(periods) != self.n - 2:
            raise ValueError(f"a geon with n={self.n} needs {self.n - 2} torus periods, got {len(periods)}")
        if any(not a > 0 for a in periods):
            raise ValueError("periods must be positive")
        if list(periods) != sorted(periods):
            raise ValueError("periods must be sorted ascending")
        xi = 4.0 * math.pi / self.n
        if self.xi_period is not None and self.xi_period != xi:
            raise ValueError("xi_period is fixed to 4 pi / n")
        object.__setattr__(self, "xi_period", xi)

    @property
    def boundary_periods(self):
        return (self.xi_period,) + self.periods

    @property
    def boundary_volume(self) -> float:
        return float(np.prod(self.boundary_periods))

    def grid(self, samples: int = 8) -> TorusGrid:
        return TorusGrid(self.n - 1, self.boundary_periods, samples)

    def to_dict(self):
        return {"n": self.n, "periods": list(self.periods)}


# coordinate maps ---------------------------------------------------------

def _x_max(n):
    return 4.0 ** (1.0 / n)


def x_from_r_forms(n: int, r: float):
    """The three equivalent closed forms of x(r), for cross-checking."""
    root = math.sqrt(r ** n - 1.0)
    first = _x_max(n) * (r ** (n / 2.0) - root) ** (2.0 / n)
    second = _x_max(n) * r * (1.0 - math.sqrt(1.0 - r ** (-n))) ** (2.0 / n)
    rho = (2.0 / n) * math.acosh(r ** (n / 2.0))
    third = _x_max(n) * math.exp(-rho)
    return first, second, third


def _validate(n, value, kind):
    if kind == "r" and not value >= 1.0:
        raise ValueError(f"r must be >= 1, got {value}")
    if kind == "rho" and not value >= 0.0:
        raise ValueError(f"rho must be >= 0, got {value}")
    if kind == "x" and not 0.0 < value <= _x_max(n) * (1 + 1e-15):
        raise ValueError(f"x must lie in (0, 4^(1/n)], got {value}")


def defining_function_map(n: int, value: float, from_: str, to: str) -> float:
    """Convert between the radial coordinates r, rho and x."""
    for k in (from_, to):
        if k not in ("r", "rho", "x"):
            raise ValueError(f"unknown coordinate {k!r}")
    _validate(n, value, from_)
    if from_ == to:
        return float(value)
    # everything goes through rho except the stable r <-> x pair
    if from_ == "r" and to == "x":
        r = value
        return _x_max(n) * (1.0 / (r ** (n / 2.0) + math.sqrt(r ** n - 1.0))) ** (2.0 / n)
    if from_ == "x" and to == "r":
        x = min(value, _x_max(n))
        return (1.0 + x ** n / 4.0) ** (2.0 / n) / x
    if from_ == "r":
        rho = (2.0 / n) * math.acosh(value ** (n / 2.0))
    elif from_ == "x":
        rho = max(math.log(_x_max(n) / value), 0.0)
    else:
        rho = float(value)
    if to == "rho":
        return rho
    if to == "x":
        return _x_max(n) * math.exp(-rho)
    return math.cosh(n * rho / 2.0) ** (2.0 / n)


# charts ------------------------------------------------------------------

def _rho_warps(n):
    def warps(s):
        half = (n / 2.0) * s
        c = jets.cosh(half) ** (2.0 / n)
        return [c * jets.tanh(half)] + [c] * (n - 2)
    return warps


def geon_chart(spec: GeonSpec, coordinate: str = "rho") -> RadialChart:
    """The geon as a RadialChart in ``r``, ``rho`` or ``x``, carrying the soliton lapse N = r."""
    n = spec.n
    per = spec.boundary_periods
    if coordinate == "rho":
        lapse = lambda s: jets.cosh((n / 2.0) * s) ** (2.0 / n)
        return RadialChart(n, "rho", _rho_warps(n), (0.0, np.inf), lapse=lapse, axis=0, periods=per)
    if coordinate == "r":
        def warps(r):
            f = r * jets.sqrt(1.0 - r ** (-n))
            return [f] + [r] * (n - 2)
        q = lambda r: 1.0 / (r * jets.sqrt(1.0 - r ** (-n)))
        return RadialChart(n, "r", warps, (1.0, np.inf), q=q, lapse=lambda r: r, periods=per)
    if coordinate == "x":
        def warps(x):
            u = x ** n * 0.25
            c = (1.0 + u) ** (2.0 / n) / x
            return [c * (1.0 - u) / (1.0 + u)] + [c] * (n - 2)
        lapse = lambda x: (1.0 + x ** n * 0.25) ** (2.0 / n) / x

        def compact(x):
            u = x ** n * 0.25
            c = (1.0 + u) ** (2.0 / n)
            return [c * (1.0 - u) / (1.0 + u)] + [c] * (n - 2), c

        return RadialChart(n, "x", warps, (0.0, _x_max(n)), q=lambda x: 1.0 / x, lapse=lapse,
                           periods=per, compact=compact)
    raise ValueError(f"unknown coordinate {coordinate!r}")


# expansion data -----------------------------------------------------------

def _poly(coeffs: dict, K: int):
    c = np.zeros(K + 1)
    for k, v in coeffs.items():
        if k <= K:
            c[k] += v
    return c


def geon_normal_series(spec: GeonSpec, K: int | None = None, samples: int = 8) -> NormalFormMetric:
    """Normal-form expansion h_x of the geon about conformal infinity (translation invariant)."""
    n = spec.n
    K = n + 3 if K is None else K
    if K < n + 1:
        raise ValueError(f"truncation order must be >= n+1 = {n + 1}")
    plus = _poly({0: 1.0, n: 0.25}, K)
    minus = _poly({0: 1.0, n: -0.25}, K)
    conf = _taylor.power(plus, 4.0 / n)
    ratio = _taylor.div(minus, plus)
    c = np.zeros((K + 1, n - 1, n - 1))
    c[:, 0, 0] = _taylor.mul(conf, _taylor.mul(ratio, ratio))
    for i in range(1, n - 1):
        c[:, i, i] = conf
    grid = spec.grid(samples)
    return NormalFormMetric(n, grid, TensorSeries(c, grid), lam=0)


def geon_kappa(n: int) -> np.ndarray:
    return np.diag([-(n - 1.0)] + [1.0] * (n - 2))


def geon_mass(spec: GeonSpec) -> float:
    """Wang mass: mass aspect -1 integrated over the boundary torus."""
    return -spec.boundary_volume


def geon_mass_printed_sum(spec: GeonSpec) -> float:
    """-(4 pi / n) * sum(a_i); equals geon_mass only when there is a single period."""
    return -spec.xi_period * float(sum(spec.periods))


@dataclass(frozen=True)
class GeonAssignment:
    """A geon filling a given boundary torus with xi on one chosen cycle.

    The boundary metric is ``scale**2`` times the geon's own, so the geon
    periods are the cycle lengths divided by ``scale``.
    """

    xi_cycle: int
    spec: GeonSpec
    scale: float
    mass: float


def geon_assignments(cycles, n: int | None = None):
    """Every choice of contractible cycle for a boundary torus with the given cycle lengths."""
    cycles = [float(c) for c in cycles]
    if not cycles:
        raise ValueError("at least one candidate cycle is required")
    if any(not c > 0 for c in cycles):
        raise ValueError("cycle lengths must be positive")
    n = len(cycles) + 1 if n is None else n
    if len(cycles) != n - 1:
        raise ValueError(f"n={n} needs {n - 1} boundary cycles, got {len(cycles)}")
    out = []
    for i, L in enumerate(cycles):
        scale = n * L / (4.0 * math.pi)
        rest = sorted(c / scale for j, c in enumerate(cycles) if j != i)
        spec = GeonSpec(n, tuple(rest))
        # mass aspect scales with weight -n under the homothety; volume with weight n-1
        mass = geon_mass(spec) * scale ** (-1.0)
        out.append(GeonAssignment(i, spec, scale, mass))
    return out


def least_mass_geon(cycles, n: int | None = None, rtol: float = 1e-12):
    """Assignments of least mass (the xi-cycle is a shortest cycle); all minimizers on ties."""
    cand = geon_assignments(cycles, n)
    best = min(a.mass for a in cand)
    return [a for a in cand if a.mass <= best + rtol * abs(best)]


def soliton_lapse(spec: GeonSpec, x: float) -> float:
    """N = r = (1 + x^n/4)^(2/n) / x."""
    n = spec.n
    if not 0.0 < x <= _x_max(n) * (1 + 1e-15):
        raise ValueError(f"x must lie in (0, 4^(1/n)], got {x}")
    return (1.0 + x ** n / 4.0) ** (2.0 / n) / x


def soliton_lapse_series(spec: GeonSpec, K: int | None = None) -> ScalarSeries:
    """Series of x*N; its x^k coefficient is the x^(k-1) coefficient of N."""
    n = spec.n
    K = n + 3 if K is None else K
    return ScalarSeries(_taylor.power(_poly({0: 1.0, n: 0.25}, K), 2.0 / n))
