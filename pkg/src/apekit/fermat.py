"""Second fundamental forms of the level sets of x in the normal-form and lapse-based compactifications.

With g = x^-2 (dx^2 + h_x) and lapse N, the two compactifications are
ghat = x^2 g and gtilde = g/N^2 = Omega^2 ghat with Omega = 1/(xN).  Level
sets {x = const} have unit normal pointing toward x = 0, and their second
fundamental form is the Lie derivative of the induced metric along it:

    Khat = -d_x h,    Ktilde = -(1/Omega) d_x (Omega^2 h).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import NormalFormMetric
from .jets import Jet
from .mass import MassReport
from .radial import RadialChart
from .series import ScalarSeries, TensorSeries, metric_inverse_series, series_multiply, series_pow
from .static import lapse_expansion

ZERO_TOL = 1e-10


@dataclass(frozen=True)
class FermatData:
    n: int
    ktilde: TensorSeries
    khat: TensorSeries
    htilde_mean: ScalarSeries
    h0: np.ndarray
    mu: np.ndarray

    @property
    def leading_ktilde(self):
        return self.ktilde.coeffs[self.n - 1]

    @property
    def leading_khat(self):
        return self.khat.coeffs[self.n - 1]


def fermat_forms(metric: NormalFormMetric, lapse: ScalarSeries | None = None,
                 report: MassReport | None = None) -> FermatData:
    """Series of Khat, Ktilde and the mean curvature Htilde of the x level sets.

    ``lapse`` is a series of x*N.  Without it the static expansion
    x N = 1 - mu x^n/(2n) built from ``report`` is used.
    """
    n = metric.n
    if metric.lam not in (0, None):
        raise ValueError("Fermat forms are implemented for flat boundaries (lambda = 0)")
    if lapse is None:
        if report is None:
            raise ValueError("missing lapse data")
        lapse = lapse_expansion(report.mu, n, 0, metric.K)
    h = metric.h
    xN = lapse.truncate(min(lapse.order, h.order))
    if xN.grid is None and h.grid is not None:
        xN = ScalarSeries(xN.coeffs, h.grid)
    khat = -h.derivative()
    omega2_h = series_multiply(series_pow(xN, -2.0), h)
    ktilde = series_multiply(xN, -omega2_h.derivative())
    ktilde = TensorSeries(ktilde.coeffs, ktilde.grid)
    inv = metric_inverse_series(omega2_h)
    htilde = series_multiply(inv, ktilde, "trace")
    mu = report.mu.values if report is not None else np.trace(np.linalg.solve(h.coeffs[0], n * h.coeffs[n]),
                                                              axis1=-2, axis2=-1)
    return FermatData(n, ktilde, khat, htilde, np.asarray(h.coeffs[0]), np.asarray(mu))


def _verdict(eigs, tol):
    eigs = np.asarray(eigs)
    pos = np.any(eigs > tol)
    neg = np.any(eigs < -tol)
    zero = np.any(np.abs(eigs) <= tol)
    if pos and neg:
        return "indefinite"
    if zero:
        return None
    return "definite" if pos else "negative-definite"


@dataclass(frozen=True)
class ProbeResult:
    eigenvalues: np.ndarray
    verdict: str

    def to_dict(self):
        ev = np.asarray(self.eigenvalues)
        return {"verdict": self.verdict, "eigenvalues": ev.reshape(-1, ev.shape[-1]).tolist()}


def semidefiniteness_probe(data: FermatData, tol: float = ZERO_TOL) -> ProbeResult:
    """Eigenvalues of the leading coefficient of Ktilde relative to h0, per node.

    A zero eigenvalue leaves the sign of Ktilde to higher orders, reported as
    ``inconclusive-at-leading-order``.
    """
    lead = data.leading_ktilde
    L = np.linalg.cholesky(np.broadcast_to(data.h0, lead.shape))
    Li = np.linalg.inv(L)
    eigs = np.linalg.eigvalsh(Li @ lead @ np.swapaxes(Li, -1, -2))
    v = _verdict(eigs, tol)
    return ProbeResult(eigs, v if v is not None else "inconclusive-at-leading-order")


def chart_fermat_eigenvalues(chart: RadialChart, x: float) -> np.ndarray:
    """Eigenvalues of Ktilde at finite x on an x-chart with lapse, computed with jets."""
    if chart.coordinate != "x" or chart.lapse is None:
        raise ValueError("an x-chart with a lapse is required")
    X = Jet.variable(float(x), 2)
    if chart.compact is not None:
        xf, xN = chart.compact(X)
    else:
        xf, xN = [X * f for f in chart.warps(X)], X * chart.lapse(X)
    omega = 1.0 / xN
    out = []
    for g in xf:
        t = omega * omega * g * g
        k = -(t.derivative().value) / omega.value
        out.append(k / t.value)
    return np.array(out)


def explicit_chart_probe(chart: RadialChart, xs, tol: float = ZERO_TOL) -> ProbeResult:
    """Sign of Ktilde sampled on an explicit chart: semidefinite when every eigenvalue is >= 0 and some vanish."""
    eigs = np.array([chart_fermat_eigenvalues(chart, x) for x in xs])
    v = _verdict(eigs, tol)
    if v is None:
        v = "semidefinite" if not np.any(eigs < -tol) else "negative-semidefinite"
    return ProbeResult(eigs, v)


def chart_mean_curvature(chart: RadialChart, x: float) -> float:
    return float(np.sum(chart_fermat_eigenvalues(chart, x)))
