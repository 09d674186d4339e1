"""Mass aspect and Wang mass, boundary conformal gauge changes, and conformal mass shifts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from .curvature import NormalFormMetric, partial_evenness_check
from .series import (
    ScalarSeries,
    TensorSeries,
    metric_inverse_series,
    series_compose,
    series_exp,
    series_multiply,
    series_revert,
)
from .torus import ScalarField, SymTensorField, integrate, spectral_diff_array

GAUGE_TOL = 1e-10


@dataclass(frozen=True)
class MassReport:
    theta: SymTensorField
    kappa: SymTensorField
    mu: ScalarField
    m: float
    h0: SymTensorField

    def to_dict(self):
        from .serialize import to_dict
        return {
            "mass": self.m,
            "mu": to_dict(self.mu),
            "theta": to_dict(self.theta),
            "kappa": to_dict(self.kappa),
            "mu_min": float(np.min(self.mu.values)),
            "mu_max": float(np.max(self.mu.values)),
        }


def extract_mass(m: NormalFormMetric) -> MassReport:
    """Read theta, kappa from the x^(n-1), x^n coefficients; mu = tr_h0 kappa; m = integral of mu dV(h0)."""
    n = m.n
    if m.K < n:
        raise ValueError(f"truncation order {m.K} too low to read the x^{n} coefficient")
    h0 = m.h.coefficient(0)
    theta = SymTensorField(m.grid, (n - 1) * m.h.coeffs[n - 1])
    kappa = SymTensorField(m.grid, n * m.h.coeffs[n])
    mu = kappa.trace(h0)
    return MassReport(theta, kappa, mu, _volume_integral(mu, h0), h0)


def _volume_integral(f: ScalarField, h0: SymTensorField) -> float:
    return integrate(ScalarField(f.grid, f.values * h0.sqrt_det().values))


@dataclass(frozen=True)
class GaugeData:
    omega0: ScalarField
    omega: ScalarSeries        # omega(x, y) in the old defining function
    xhat_of_x: ScalarSeries
    x_of_xhat: ScalarSeries
    omega_hat: ScalarSeries    # omega expressed in the new defining function
    cross_residual: float       # largest parity-violating cross-term coefficient


def solve_gauge_ode(m: NormalFormMetric, omega0: ScalarField, K: int | None = None) -> ScalarSeries:
    """Order-by-order solution of 2 w' + x (w'^2 + h_x^{-1}(dw, dw)) = 0 with w(0) = omega0.

    The x^k balance reads 2(k+1) w_{k+1} = -[w'^2 + h^{-1}(dw, dw)]_{k-1}, so w_1 = 0.
    """
    K = m.K if K is None else K
    grid = m.grid
    Hc = metric_inverse_series(m.h).coeffs
    w0 = np.asarray(omega0.values, dtype=float)
    lead = w0.shape
    d = grid.boundary_dim
    w = np.zeros((K + 1,) + lead)
    w[0] = w0
    grads = np.zeros((K + 1,) + lead + (d,))
    if lead:
        grads[0] = np.stack([spectral_diff_array(w0, grid, a) for a in range(d)], axis=-1)
    for k in range(1, K):
        B = np.zeros(lead)
        for i in range(k):
            B = B + (i + 1) * w[i + 1] * (k - i) * w[k - i]
        if lead:
            for i in range(k):
                for j in range(k - i):
                    l = k - 1 - i - j
                    if l < Hc.shape[0]:
                        B = B + np.einsum("...a,...ab,...b->...", grads[i], Hc[l], grads[j])
        w[k + 1] = -B / (2.0 * (k + 1))
        if lead:
            grads[k + 1] = np.stack([spectral_diff_array(w[k + 1], grid, a) for a in range(d)], axis=-1)
    return ScalarSeries(w, grid)


def gauge_transform(m: NormalFormMetric, omega0: ScalarField, tol: float = GAUGE_TOL):
    """Change the boundary representative h0 -> e^(2 omega0) h0 and return the new tangential expansion.

    Only the tangential block is transformed (through the truncation order);
    the boundary coordinates are not re-straightened.  The parity of the
    neglected cross terms is monitored and must hold through order n+1.
    """
    n = m.n
    if n % 2 == 0:
        raise ValueError("gauge transform is only supported for odd n")
    even, bad = partial_evenness_check(m)
    if not even:
        raise ValueError(f"input is not partially even (odd coefficient at order {bad})")
    grid = m.grid
    K = m.K
    omega = solve_gauge_ode(m, omega0, K)
    # xhat = x e^omega
    xh = np.zeros((K + 1,) + omega.lead_shape)
    xh[1:] = series_exp(omega).coeffs[:K]
    xhat_of_x = ScalarSeries(xh, grid)
    x_of_xhat = series_revert(xhat_of_x)
    w_hat = series_compose(omega, x_of_xhat, require_tangent=False)
    h_sub = series_compose(m.h, x_of_xhat, require_tangent=False)
    T = series_multiply(series_exp(w_hat.scale(2.0)), h_sub)

    d = grid.boundary_dim
    wc = w_hat.coeffs
    if not w_hat.is_constant:
        grads = [ScalarSeries(spectral_diff_array(wc, grid, a, offset=1), grid) for a in range(d)]
        extra = np.zeros(T.coeffs.shape)
        for a in range(d):
            for b in range(a, d):
                p = series_multiply(grads[a], grads[b]).coeffs
                extra[2:, ..., a, b] += p[: K - 1]
                if b != a:
                    extra[2:, ..., b, a] += p[: K - 1]
        T = TensorSeries(T.coeffs + extra, grid)
    else:
        grads = [ScalarSeries(np.zeros_like(wc), grid) for _ in range(d)]

    # cross terms of the new metric: dxhat^2 and dxhat dy coefficients
    wx = w_hat.derivative().pad(K)
    c_xx = wx.times_power(1)
    c_xx = series_multiply(c_xx, c_xx) - wx.times_power(1).scale(2.0)
    resid = _parity_violation(c_xx.coeffs, odd=True, upto=min(n + 1, K - 1))
    for a in range(d):
        c_xa = series_multiply(wx.times_power(1), grads[a]).times_power(1) - grads[a].times_power(1)
        resid = max(resid, _parity_violation(c_xa.coeffs, odd=False, upto=min(n + 1, K - 1)))
    if resid > tol:
        raise ValueError(f"cross-term residual {resid:.3e} exceeds tolerance; evenness assumptions violated")

    new = NormalFormMetric(n, grid, TensorSeries(T.coeffs, grid), None)
    data = GaugeData(omega0, omega, xhat_of_x, x_of_xhat, w_hat, resid)
    return new, data


def _parity_violation(c, odd: bool, upto: int) -> float:
    """Largest coefficient of the wrong parity through order ``upto`` (odd=True flags odd orders)."""
    start = 1 if odd else 0
    vals = [np.max(np.abs(c[k])) for k in range(start, min(upto, c.shape[0] - 1) + 1, 2)]
    return float(max(vals)) if vals else 0.0


def conformal_mass_shift(report: MassReport, c_n: float, n: int) -> MassReport:
    """kappa -> kappa - 8 c_n/(n(n-2)) h0, the mass change from a conformal factor 1 - c_n x^n/n + ..."""
    if c_n < 0:
        raise ValueError("c_n must be non-negative")
    shift = 8.0 * c_n / (n * (n - 2.0))
    h0 = report.h0
    kap = SymTensorField(h0.grid, report.kappa.values - shift * h0.values)
    mu = kap.trace(h0)
    return MassReport(report.theta, kap, mu, _volume_integral(mu, h0), h0)


def defining_recompute(c_n: float, n: int, K: int | None = None):
    """Series of xhat(x) solving dxhat/xhat = (1 - 4 c_n x^n/(n(n-2)))^(1/2) dx/x, and its inverse."""
    if n < 3:
        raise ValueError("n must be >= 3")
    K = n + 3 if K is None else K
    b = 4.0 * c_n / (n * (n - 2.0))
    log_ratio = np.zeros(K + 1)
    j = 1
    while n * j <= K:
        log_ratio[n * j] = binom(0.5, j) * (-b) ** j / (n * j)
        j += 1
    ratio = series_exp(ScalarSeries(log_ratio)).coeffs
    xh = np.zeros(K + 1)
    xh[1:] = ratio[:K]
    xhat = ScalarSeries(xh)
    return xhat, series_revert(xhat)
