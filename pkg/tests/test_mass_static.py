import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from apekit import jets
from apekit.curvature import NormalFormMetric
from apekit.geon import GeonSpec, geon_chart, geon_normal_series, soliton_lapse_series
from apekit.mass import (
    conformal_mass_shift,
    defining_recompute,
    extract_mass,
    gauge_transform,
    solve_gauge_ode,
)
from apekit.radial import model_x_chart, radial_function_data
from apekit.series import TensorSeries
from apekit.static import (
    StaticPair,
    holographic_energy,
    indicial_data,
    lapse_expansion,
    log_form_residual,
    lstar_apply,
    static_residual,
)
from apekit.torus import ScalarField, spectral_derivative


@pytest.fixture(scope="module")
def geon3():
    return geon_normal_series(GeonSpec(3, (1.0,)), samples=16)


def _omega0(grid, amp=0.1):
    return ScalarField.from_function(grid, lambda X, Y: amp * np.sin(2 * np.pi * X / grid.periods[0]))


def test_gauge_ode_residual_is_high_order(geon3):
    w0 = _omega0(geon3.grid)
    w = solve_gauge_ode(geon3, w0)
    x = 0.05
    val = ScalarField(geon3.grid, w.evaluate(x))
    wx = ScalarField(geon3.grid, w.derivative().evaluate(x))
    grads = [spectral_derivative(val, a).values for a in range(2)]
    hx = geon3.h.evaluate(x)
    Hinv = np.linalg.inv(np.broadcast_to(hx, geon3.grid.shape + (2, 2)))
    g = np.stack(grads, axis=-1)
    quad_form = np.einsum("...a,...ab,...b->...", g, Hinv, g)
    resid = 2 * wx.values + x * (wx.values ** 2 + quad_form)
    assert np.max(np.abs(resid)) < 1e-9
    assert np.max(np.abs(w.coeffs[1])) == 0.0


def test_gauge_inverse_map_against_pointwise_newton(geon3):
    w0 = _omega0(geon3.grid)
    _, data = gauge_transform(geon3, w0)
    xhat = 0.02
    series_vals = np.asarray(data.x_of_xhat.evaluate(xhat))
    wc = data.omega.coeffs
    idx = (3, 5)
    f = lambda x: x * math.exp(sum(wc[k][idx] * x ** k for k in range(wc.shape[0]))) - xhat
    root = brentq(f, 1e-6, 0.1, xtol=1e-16)
    assert series_vals[idx] == pytest.approx(root, rel=1e-10)


def test_constant_gauge_rescales_mass_aspect(geon3):
    new, _ = gauge_transform(geon3, ScalarField.constant(geon3.grid, 0.3))
    np.testing.assert_allclose(extract_mass(new).mu.values, -math.exp(-0.9), rtol=1e-13)


def test_gauge_round_trip(geon3):
    w0 = _omega0(geon3.grid)
    new, _ = gauge_transform(geon3, w0)
    back, _ = gauge_transform(new, -w0)
    np.testing.assert_allclose(extract_mass(back).mu.values, extract_mass(geon3).mu.values, atol=1e-12)


def test_gauge_rejects_even_dimension_and_odd_terms():
    m4 = geon_normal_series(GeonSpec(4, (1.0, 1.0)))
    with pytest.raises(ValueError):
        gauge_transform(m4, ScalarField.constant(m4.grid, 0.1))
    m5 = geon_normal_series(GeonSpec(5, (1.0, 1.0, 1.0)))
    c = m5.h.coeffs.copy()
    c[1] += 0.01 * np.eye(4)
    bad = NormalFormMetric(5, m5.grid, TensorSeries(c, m5.grid))
    with pytest.raises(ValueError):
        gauge_transform(bad, ScalarField.constant(m5.grid, 0.1))


@pytest.mark.parametrize("n,c_n", [(3, 1.0), (4, 0.3), (5, 0.7)])
def test_defining_recompute_against_quadrature(n, c_n):
    b = 4 * c_n / (n * (n - 2))
    xhat, _ = defining_recompute(c_n, n, K=6 * n)
    x = 0.3
    log_ratio = quad(lambda t: (math.sqrt(1 - b * t ** n) - 1) / t, 0, x, epsabs=1e-15)[0]
    assert float(xhat.evaluate(x)) == pytest.approx(x * math.exp(log_ratio), rel=1e-12)


def test_defining_recompute_leading_coefficient():
    xhat, _ = defining_recompute(1.0, 3)
    assert xhat.coeffs[4] == pytest.approx(-2.0 / 9.0, rel=1e-15)


def test_conformal_mass_shift(geon3):
    rep = extract_mass(geon3)
    after = conformal_mass_shift(rep, 0.05, 3)
    vol = geon3.grid.volume
    assert rep.m - after.m == pytest.approx(8 * 2 * 0.05 * vol / 3, rel=1e-13)
    with pytest.raises(ValueError):
        conformal_mass_shift(rep, -0.1, 3)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_indicial_roots(n):
    d = indicial_data(n)
    assert d.roots == (-1, n)


def test_lapse_expansion_and_holographic_energy(geon3):
    rep = extract_mass(geon3)
    xN = lapse_expansion(rep.mu, 3)
    np.testing.assert_allclose(xN.coeffs[3], 1.0 / 6.0)
    series = soliton_lapse_series(GeonSpec(3, (1.0,)))
    assert series.coeffs[3] == pytest.approx(1.0 / 6.0)
    he = holographic_energy(rep)
    np.testing.assert_allclose(he.lapse_coefficient.values, 1.0 / 6.0)


def test_series_static_pair_matches_chart():
    sp = GeonSpec(4, (1.0, 1.0))
    m = geon_normal_series(sp, K=16)
    pair = StaticPair(m, soliton_lapse_series(sp, 16), normalized=True)
    assert static_residual(pair, 0.1).max_abs < 1e-12


def test_lstar_equals_combination_for_non_static_function():
    chart = geon_chart(GeonSpec(3, (1.0,)), "rho")
    f = lambda s: jets.cosh(s) + 0.3 * s * s
    pair = StaticPair(chart, f)
    res = static_residual(pair, 0.8)
    ls = lstar_apply(chart, f, 0.8)
    np.testing.assert_allclose(ls, -res.ric_form - res.trace_form, atol=1e-12)
    assert np.max(np.abs(ls)) > 0.1


def test_log_form_on_geon_and_model():
    chart = geon_chart(GeonSpec(3, (1.0,)), "rho")
    r = log_form_residual(chart, lambda s: jets.log(jets.cosh(1.5 * s) ** (2.0 / 3.0)), 0.7)
    assert np.max(np.abs(r.ric_form)) < 1e-12 and abs(r.trace_form) < 1e-12
    model = model_x_chart(4)
    assert static_residual(StaticPair(model), 0.3).max_abs < 1e-12


def test_static_pair_errors():
    from apekit.radial import hyperbolic_chart
    with pytest.raises(ValueError):
        StaticPair(hyperbolic_chart(3))
    chart = geon_chart(GeonSpec(3, (1.0,)), "rho")
    with pytest.raises(ValueError):
        static_residual(StaticPair(chart, lambda s: -1.0 - s * s), 0.5)
    with pytest.raises(ValueError):
        StaticPair(geon_normal_series(GeonSpec(3, (1.0,))), lapse_expansion(-1.0, 3).scale(2.0), normalized=True)


def test_radial_function_hessian_of_distance():
    # warps e^s: Hess(rho) has tangential entries f'/f = 1
    from apekit.radial import hyperbolic_chart
    d = radial_function_data(hyperbolic_chart(3), 0.4, lambda s: s)
    np.testing.assert_allclose(d.hessian, [0.0, 1.0, 1.0], atol=1e-14)
