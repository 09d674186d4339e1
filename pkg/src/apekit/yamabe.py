"""Yamabe operator on geon backgrounds, boundary jet recursion, subsolutions and a radial solver.

For a conformal factor phi (new metric phi^(4/(n-2)) g) the operator is

    Y(phi) = -4 (n-1)/(n-2) Delta phi + n(n-1) (phi^((n+2)/(n-2)) - phi) + A phi,

with A = R + n(n-1).  Near phi = 1 everything is evaluated in terms of
v = phi - 1 using log1p/expm1 so that tiny deviations keep full precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels, _taylor, jets
from .geon import GeonSpec, geon_chart, geon_mass, geon_normal_series
from .jets import Jet
from .mass import conformal_mass_shift, defining_recompute, extract_mass
from .radial import RadialChart, model_x_chart


class YamabeConvergenceError(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


def _is_jet(t):
    return isinstance(t, Jet)


@dataclass(frozen=True)
class YamabeProblem:
    """Radial Yamabe problem with a smooth bump deficit A(rho) = amp * exp(1 - 1/(1 - t^2)).

    ``t = (rho - center)/width`` and A vanishes for |t| >= 1.  With
    ``spec=None`` the background is the flat model x^-2 (dx^2 + flat), used
    for the subsolution checks; there rho = -log x.
    """

    n: int
    spec: Optional[GeonSpec] = None
    amplitude: float = 0.0
    center: float = 1.0
    width: float = 0.5

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.spec is not None and self.spec.n != self.n:
            raise ValueError("geon dimension mismatch")
        if self.amplitude < 0:
            raise ValueError("the deficit A must be non-negative")
        if self.width <= 0:
            raise ValueError("bump width must be positive")
        if self.spec is not None and self.amplitude > 0 and self.center - self.width < 0:
            raise ValueError("bump must be supported away from the central torus")

    @property
    def support(self):
        return (self.center - self.width, self.center + self.width)

    def rho_of_x(self, x):
        if self.spec is None:
            return -jets.log(x) if _is_jet(x) else -math.log(x)
        c = math.log(4.0) / self.n
        return c - jets.log(x) if _is_jet(x) else c - math.log(x)

    def x_of_rho(self, rho):
        scale = 1.0 if self.spec is None else 4.0 ** (1.0 / self.n)
        return scale * np.exp(-np.asarray(rho, dtype=float))

    def deficit(self, rho):
        """A at rho (float, array or Jet)."""
        if _is_jet(rho):
            t = (rho - self.center) * (1.0 / self.width)
            if self.amplitude == 0 or abs(t.value) >= 1:
                return Jet.const(0.0, rho.order, np.shape(t.value))
            return self.amplitude * jets.exp(1.0 - 1.0 / (1.0 - t * t))
        rho = np.asarray(rho, dtype=float)
        t = (rho - self.center) / self.width
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
        return out if out.ndim else float(out)

    def x_chart(self) -> RadialChart:
        return model_x_chart(self.n) if self.spec is None else geon_chart(self.spec, "x")

    def mean_curvature(self, rho):
        """Sum of warp log-derivatives (the radial Laplacian drift) of the geon in rho."""
        n = self.n
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            return 0.5 * (n - 2) * np.tanh(0.5 * n * rho) + 0.5 * n / np.tanh(0.5 * n * rho)


def _constants(n):
    return 4.0 * (n - 1.0) / (n - 2.0), 4.0 / (n - 2.0)


def nonlinear_term(v, n):
    """n(n-1)(phi^p - phi) with phi = 1 + v, evaluated stably for small v."""
    _, q = _constants(n)
    v = np.asarray(v, dtype=float)
    return n * (n - 1.0) * (1.0 + v) * np.expm1(q * np.log1p(v))


def laplacian_expansion(problem: YamabeProblem, phi: Callable[[Jet], Jet], x: float) -> float:
    """Radial Laplacian x^2 phi'' + x^2 (log sqrt det h)' phi' - (n-2) x phi' in the defining function."""
    n = problem.n
    X = Jet.variable(float(x), 3)
    P = phi(X)
    chart = problem.x_chart()
    # sqrt det h_x = prod_i (x f_i(x)) in the x-chart
    logdet = sum(jets.log(f * X) for f in chart.warps(X))
    dlog = logdet.deriv(1)
    return float(x * x * P.deriv(2) + x * x * dlog * P.deriv(1) - (n - 2) * x * P.deriv(1))


def yamabe_apply(problem: YamabeProblem, phi: Callable[[Jet], Jet], x: float,
                 v: Callable[[Jet], Jet] | None = None) -> float:
    """Y(phi) at defining-function value x.

    Passing ``v`` (phi = 1 + v) instead of ``phi`` keeps precision when phi is
    extremely close to 1.
    """
    if v is None:
        v = lambda X: phi(X) - 1.0
    if phi is None:
        phi = lambda X: 1.0 + v(X)
    n = problem.n
    kap, _ = _constants(n)
    V = v(Jet.variable(float(x), 0)).value
    if not 1.0 + V > 0:
        raise ValueError(f"phi must be positive (phi = {1.0 + V})")
    lap = laplacian_expansion(problem, v, x)
    A = problem.deficit(problem.rho_of_x(float(x)))
    return float(-kap * lap + nonlinear_term(V, n) + A * (1.0 + V))


def recursion_coefficient(n: int, l: int) -> int:
    """Coefficient -4(l^2 - (n-1) l - n) of v^(l)(0) in the boundary recursion (integer arithmetic)."""
    return -4 * (l * l - (n - 1) * l - n)


@dataclass(frozen=True)
class BoundaryJets:
    v_jets: list             # derivatives v^(l)(0), l = 0..L
    free_order: int          # the indicial order n where v^(n)(0) is undetermined
    coefficients: list       # recursion coefficients for l = 0..L
    obstruction: float       # residual at the free order (nonzero would force a log term)


def boundary_jet_recursion(n: int, A_jets, free_value: float = 0.0, tol: float = 1e-12,
                           drift=None) -> BoundaryJets:
    """Solve the x-expansion of the Yamabe equation at conformal infinity order by order.

    ``A_jets[l]`` is the l-th x-derivative of A at 0.  ``drift`` optionally
    gives Taylor coefficients of (log sqrt det h_x)' (the flat model when omitted).
    ``free_value`` is the value assigned to the undetermined v^(n)(0).
    """
    A = np.asarray(A_jets, dtype=float)
    L = A.shape[0] - 1
    for l in range(min(n, L) + 1):
        if abs(A[l]) > tol:
            raise ValueError(f"A^({l})(0) = {A[l]:.3e} must vanish for l <= n")
    fact = np.array([math.factorial(l) for l in range(L + 1)], dtype=float)
    a = A / fact
    dr = np.zeros(L + 1) if drift is None else np.resize(np.asarray(drift, dtype=float), L + 1)
    if drift is not None and len(drift) < L + 1:
        dr[len(drift):] = 0.0
    _, q = _constants(n)

    def equation(vc):
        one_v = vc.copy()
        one_v[0] += 1.0
        x2vpp = np.zeros(L + 1)
        d1 = _taylor.derivative(vc)
        d2 = _taylor.derivative(d1)
        x2vpp[2:] = d2[: L - 1]
        xvp = np.zeros(L + 1)
        xvp[1:] = d1[:L]
        x2drift = np.zeros(L + 1)
        x2drift[2:] = _taylor.mul(dr, np.concatenate([d1, [0.0]]))[: L - 1]
        bracket = _taylor.power(one_v, q)
        bracket[0] -= 1.0
        bracket = bracket + a / (n * (n - 1.0))
        return x2vpp + x2drift - (n - 2) * xvp - 0.25 * n * (n - 2) * _taylor.mul(one_v, bracket)

    vc = np.zeros(L + 1)
    obstruction = 0.0
    for l in range(1, L + 1):
        rest = equation(vc)[l]
        c = l * l - (n - 1) * l - n
        if c == 0:
            obstruction = float(abs(rest))
            vc[l] = free_value / fact[l]
            continue
        vc[l] = -rest / c
    return BoundaryJets(list(vc * fact), n, [recursion_coefficient(n, l) for l in range(L + 1)], obstruction)


@dataclass(frozen=True)
class SubsolutionData:
    w: float
    laplacian: float
    y: float
    laplacian_leading: float
    y_leading: float


def subsolution(n: int, alpha: float, x: float, problem: YamabeProblem | None = None) -> SubsolutionData:
    """w = 1 - alpha (x^n + n x^(n+1)) with its Laplacian and Y(w), numerically and at leading order."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    problem = YamabeProblem(n) if problem is None else problem
    kap, _ = _constants(n)
    v = lambda X: -alpha * (X ** n + n * X ** (n + 1))
    w = 1.0 - alpha * (x ** n + n * x ** (n + 1))
    lap = laplacian_expansion(problem, v, x)
    y = yamabe_apply(problem, None, x, v=v)
    A = problem.deficit(problem.rho_of_x(float(x)))
    lap_lead = -alpha * (n * x ** n + 2 * n * (n + 1) * x ** (n + 1))
    y_lead = 4 * alpha * n * (n - 1) * (n + 2) / (n - 2) * x ** (n + 1) + A * w
    return SubsolutionData(w, lap, y, lap_lead, y_lead)


# radial solver ------------------------------------------------------------

@dataclass
class RadialProfile:
    rho: np.ndarray
    x: np.ndarray
    v: np.ndarray
    residual: np.ndarray
    iterations: int
    history: list

    @property
    def phi(self):
        return 1.0 + self.v


def _newton(problem: YamabeProblem, R: float, h: float, tol: float, max_iter: int) -> RadialProfile:
    n = problem.n
    M = int(round(R / h))
    h = R / M
    rho = h * np.arange(M + 1)
    H = problem.mean_curvature(rho)
    H[0] = 0.0  # the centre row uses the axis limit and ignores H
    A = np.asarray(problem.deficit(rho), dtype=float)
    v = np.zeros(M + 1)
    history = []
    F, lo, d, up = _kernels.yamabe_system(v, h, H, A, n, float(n))
    norm = float(np.max(np.abs(F)))
    history.append(norm)
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise YamabeConvergenceError(f"Newton did not converge in {max_iter} iterations", history)
        ab = np.zeros((3, M + 1))
        ab[0, 1:] = up
        ab[1] = d
        ab[2, :-1] = lo
        step = solve_banded((1, 1), ab, -F)
        t = 1.0
        while True:
            trial = v + t * step
            if np.all(trial > -1.0):
                Ft = _kernels.yamabe_system(trial, h, H, A, n, float(n))
                nt = float(np.max(np.abs(Ft[0])))
                if nt <= (1.0 - 1e-4 * t) * norm or t < 1e-6:
                    break
            t *= 0.5
        v = trial
        F, lo, d, up = Ft
        it += 1
        if nt >= norm and t < 1e-6:
            history.append(nt)
            raise YamabeConvergenceError("line search stalled", history)
        norm = nt
        history.append(norm)
    return RadialProfile(rho, problem.x_of_rho(rho), v, F, it, history)


@dataclass
class YamabeSolution:
    profile: RadialProfile
    c_n: float
    c_n_by_radius: list
    radii: list
    converged: bool
    iterations: int
    stability: float           # relative change of c_n between the last two radii
    decay_exponent: float      # fitted exponent of |phi - 1| ~ x^p near the boundary

    def to_dict(self):
        return {"converged": self.converged, "iterations": self.iterations, "c_n": self.c_n,
                "c_n_by_radius": self.c_n_by_radius, "radii": self.radii,
                "stability": self.stability, "decay_exponent": self.decay_exponent}


def _extract(problem, prof: RadialProfile):
    n = problem.n
    return -n * prof.v[-1] / prof.x[-1] ** n


def solve_radial_bvp(problem: YamabeProblem, h: float = 0.02, radii=None, tol: float = 1e-11,
                     max_iter: int = 20) -> YamabeSolution:
    """Newton solve of Y(1 + v) = 0 on the geon for several matching radii, with Richardson extrapolation of c_n.

    The outer closure is v' = -n v in rho, i.e. v = O(x^n).  The estimate
    c_n(R) = -n v(R)/x(R)^n carries an O(x(R)^n) bias removed by extrapolation.
    """
    if problem.spec is None:
        raise ValueError("the radial solver needs a geon background")
    n = problem.n
    radii = [9.0 / n, 12.0 / n, 15.0 / n] if radii is None else sorted(float(r) for r in radii)
    if problem.amplitude > 0 and radii[0] <= problem.support[1]:
        raise ValueError("matching radii must lie outside the support of A")
    profiles = [_newton(problem, R, h, tol, max_iter) for R in radii]
    raw = [_extract(problem, p) for p in profiles]
    ext = [raw[0]]
    for i in range(1, len(raw)):
        qf = (profiles[i].x[-1] / profiles[i - 1].x[-1]) ** n
        ext.append((raw[i] - qf * raw[i - 1]) / (1.0 - qf))
    c_n = float(ext[-1])
    prev = ext[-2] if len(ext) > 1 else ext[-1]
    stability = 0.0 if c_n == 0 else abs(c_n - prev) / abs(c_n)
    prof = profiles[-1]
    if problem.amplitude > 0 and not c_n > 0:
        raise YamabeConvergenceError(f"extracted c_n = {c_n:.3e} is not positive for a non-trivial deficit",
                                     prof.history)
    mask = prof.rho > 0.5 * (prof.rho[-1] + max(problem.support[1], 0.0))
    if problem.amplitude > 0 and np.count_nonzero(mask) >= 2 and np.all(prof.v[mask] < 0):
        p = np.polyfit(np.log(prof.x[mask]), np.log(-prof.v[mask]), 1)[0]
    else:
        p = float("inf")
    return YamabeSolution(prof, c_n, [float(c) for c in ext], radii, True,
                          max(p_.iterations for p_ in profiles), float(stability), float(p))


@dataclass(frozen=True)
class ComparisonCheck:
    eps: float
    alpha1: float
    max_violation: float   # max of phi - w_alpha1 on (x_M, eps); <= 0 means the bound holds
    c_n_bound_holds: bool


def comparison_check(problem: YamabeProblem, sol: YamabeSolution, eps_rho: float | None = None) -> ComparisonCheck:
    """Certify alpha_1 from phi on the sphere x = eps and test phi <= w_alpha1 between the matching sphere and eps."""
    n = problem.n
    prof = sol.profile
    if eps_rho is None:
        eps_rho = 0.5 * (problem.support[1] + prof.rho[-1])
    i = int(np.searchsorted(prof.rho, eps_rho))
    eps = prof.x[i]
    alpha1 = -prof.v[i] / (eps ** n * (1.0 + n * eps))
    xs = prof.x[i:]
    w_minus_1 = -alpha1 * (xs ** n + n * xs ** (n + 1))
    viol = float(np.max(prof.v[i:] - w_minus_1))
    return ComparisonCheck(float(eps), float(alpha1), viol, bool(sol.c_n >= alpha1))


@dataclass(frozen=True)
class MassDecrease:
    m_before: float
    m_after: float
    c_n: float
    expected_shift: float
    xhat_of_x: list
    solution: Optional[YamabeSolution] = field(default=None, repr=False)

    def to_dict(self):
        return {"converged": True if self.solution is None else self.solution.converged,
                "iterations": 0 if self.solution is None else self.solution.iterations,
                "c_n": self.c_n, "mass_before": self.m_before, "mass_after": self.m_after,
                "expected_shift": self.expected_shift}


def mass_decrease_pipeline(spec: GeonSpec, problem: YamabeProblem | None = None, **solver_kw) -> MassDecrease:
    """Solve the Yamabe problem, shift the mass aspect by the extracted c_n and recompute the defining function."""
    n = spec.n
    problem = YamabeProblem(n, spec) if problem is None else problem
    if problem.spec != spec:
        raise ValueError("problem background differs from spec")
    sol = solve_radial_bvp(problem, **solver_kw)
    c_n = max(sol.c_n, 0.0) if problem.amplitude == 0 else sol.c_n
    report = extract_mass(geon_normal_series(spec))
    after = conformal_mass_shift(report, c_n, n)
    xhat, _ = defining_recompute(c_n, n)
    shift = 8.0 * (n - 1) * c_n * spec.boundary_volume / (n * (n - 2.0))
    if c_n > 0 and not after.m < report.m:
        raise RuntimeError("mass did not decrease")
    return MassDecrease(report.m, after.m, c_n, shift, xhat.coeffs.tolist(), sol)


__all__ = [
    "YamabeProblem", "YamabeConvergenceError", "yamabe_apply", "laplacian_expansion",
    "boundary_jet_recursion", "recursion_coefficient", "subsolution", "solve_radial_bvp",
    "comparison_check", "mass_decrease_pipeline", "nonlinear_term", "geon_mass",
]
