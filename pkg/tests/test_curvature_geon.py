import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apekit.curvature import (
    NormalFormMetric,
    build_model_expansion,
    einstein_deficit,
    partial_evenness_check,
    solve_kappa_einstein_order,
)
from apekit.geon import (
    GeonSpec,
    defining_function_map,
    geon_assignments,
    geon_chart,
    geon_mass,
    geon_mass_printed_sum,
    geon_normal_series,
    least_mass_geon,
    x_from_r_forms,
)
from apekit.mass import extract_mass
from apekit.radial import hyperbolic_chart, radial_curvature
from apekit.series import TensorSeries
from apekit.torus import SymTensorField, TorusGrid


def _fd_scalar_curvature(n, rho, h=1e-3):
    """Warped-product scalar curvature from five-point differences of the plain-float warps."""
    def warps(s):
        c = math.cosh(n * s / 2) ** (2.0 / n)
        return [c * math.tanh(n * s / 2)] + [c] * (n - 2)

    f = np.array(warps(rho))
    pts = [np.array(warps(rho + k * h)) for k in (-2, -1, 1, 2)]
    d1 = (pts[0] - 8 * pts[1] + 8 * pts[2] - pts[3]) / (12 * h)
    d2 = (-pts[0] + 16 * pts[1] - 30 * f + 16 * pts[2] - pts[3]) / (12 * h * h)
    L = d1 / f
    return float(-2 * np.sum(d2 / f) - (np.sum(L) ** 2 - np.sum(L ** 2)))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_geon_curvature_finite_difference_oracle(n):
    fd = _fd_scalar_curvature(n, 1.0)
    jet = radial_curvature(geon_chart(GeonSpec(n, (1.0,) * (n - 2)), "rho"), 1.0).scalar
    assert abs(fd + n * (n - 1)) < 1e-7
    assert abs(jet - fd) < 1e-7


@pytest.mark.parametrize("n", [3, 5])
def test_geon_curvature_in_every_chart(n):
    sp = GeonSpec(n, (1.0,) * (n - 2))
    for coord, pts in (("r", [1.01, 2.0, 30.0]), ("x", [0.01, 0.7, 1.2]), ("rho", [0.0, 1e-4, 2.0])):
        chart = geon_chart(sp, coord)
        for s in pts:
            cur = radial_curvature(chart, s)
            assert abs(cur.scalar + n * (n - 1)) < 1e-9
            assert cur.ricci.sum() == pytest.approx(cur.scalar, abs=1e-12)
            # static but not Einstein; the torus directions share one eigenvalue
            np.testing.assert_allclose(cur.ricci[2:], cur.ricci[2], atol=1e-12)


def test_hyperbolic_model_has_constant_curvature():
    cur = radial_curvature(hyperbolic_chart(4), 0.3)
    np.testing.assert_allclose(cur.ricci, -3.0, atol=1e-14)


@given(st.floats(1.1, 50.0))
def test_x_of_r_closed_forms_agree(r):
    a, b, c = x_from_r_forms(3, r)
    assert a == pytest.approx(c, rel=1e-9)
    assert b == pytest.approx(c, rel=1e-9)


@given(st.integers(3, 7), st.floats(0.1, 8.0))
def test_coordinate_roundtrip(n, rho):
    x = defining_function_map(n, rho, "rho", "x")
    r = defining_function_map(n, x, "x", "r")
    assert defining_function_map(n, r, "r", "rho") == pytest.approx(rho, abs=1e-7)
    assert defining_function_map(n, r, "r", "x") == pytest.approx(x, rel=1e-12)


def test_coordinate_validation():
    with pytest.raises(ValueError):
        defining_function_map(3, 0.5, "r", "x")
    with pytest.raises(ValueError):
        defining_function_map(3, -0.1, "rho", "r")
    with pytest.raises(ValueError):
        defining_function_map(3, 1.0, "r", "y")
    with pytest.raises(ValueError):
        GeonSpec(4, (2.0, 1.0))
    with pytest.raises(ValueError):
        GeonSpec(4, (1.0,))


def test_mass_product_versus_printed_sum():
    sp = GeonSpec(4, (1.0, 2.0))
    assert geon_mass(sp) == pytest.approx(-math.pi * 2.0)
    assert geon_mass_printed_sum(sp) == pytest.approx(-math.pi * 3.0)
    square = GeonSpec(4, (1.0, 1.0))
    assert geon_mass(square) == pytest.approx(-math.pi, rel=1e-14)
    assert geon_mass_printed_sum(square) == pytest.approx(-2 * math.pi, rel=1e-14)
    one = GeonSpec(3, (1.7,))
    assert geon_mass(one) == pytest.approx(geon_mass_printed_sum(one))


def test_mass_by_integration_of_aspect():
    sp = GeonSpec(4, (1.0, 1.0))
    assert extract_mass(geon_normal_series(sp)).m == pytest.approx(-math.pi, rel=1e-13)


def test_least_mass_chooses_shortest_cycle():
    best = least_mass_geon([1.0, 2.5])
    assert [a.xi_cycle for a in best] == [0]
    masses = [a.mass for a in geon_assignments([1.0, 2.5])]
    assert masses[0] < masses[1]
    # homothety by c = 3 L_xi/(4 pi): the geon has periods (4 pi/3, 2.5/c) and mass scales by 1/c
    assert masses[0] == pytest.approx(-2.5 * (4 * math.pi / 3) ** 3, rel=1e-14)
    assert masses[0] == pytest.approx(-183.74089884622109, rel=1e-12)
    tie = least_mass_geon([1.3, 1.3])
    assert sorted(a.xi_cycle for a in tie) == [0, 1]


def test_geon_deficit_orders_and_trace_identity():
    for n in (3, 4, 5):
        rep = einstein_deficit(geon_normal_series(GeonSpec(n, (1.0,) * (n - 2))))
        assert rep.ape_order == n
        assert rep.trace_mismatch < 1e-12


def test_trace_identity_on_non_einstein_metric(rng):
    n = 4
    g = TorusGrid(3, (1.0, 1.0, 1.0), 4)
    X = g.coordinates()
    c = np.zeros((6,) + g.shape + (3, 3))
    c[0] = np.eye(3)
    c[2] = 0.2 * np.sin(2 * np.pi * X[0])[..., None, None] * np.eye(3)
    c[3, ..., 0, 1] = c[3, ..., 1, 0] = np.cos(2 * np.pi * X[1])
    m = NormalFormMetric(n, g, TensorSeries(c, g))
    rep = einstein_deficit(m)
    assert rep.trace_mismatch < 1e-12
    assert rep.ape_order == 2


def test_metric_validation():
    g = TorusGrid(2, (1.0, 1.0), 4)
    c = np.zeros((3, 2, 2))
    c[0] = np.eye(2)
    with pytest.raises(ValueError):
        NormalFormMetric(3, g, TensorSeries(c, g))
    c = np.zeros((5, 2, 2))
    c[0] = -np.eye(2)
    with pytest.raises(ValueError):
        NormalFormMetric(3, g, TensorSeries(c, g))
    h0 = SymTensorField.identity(g)
    with pytest.raises(ValueError):
        build_model_expansion(3, 0, h0, SymTensorField.constant(g, np.eye(2)), SymTensorField.constant(g, np.zeros((2, 2))))


def test_kappa_solve_on_hyperbolic_torus_free_model(rng):
    # theta trace-free and constant: the Einstein order forces kappa = 0 on the flat torus
    g = TorusGrid(2, (1.0, 2.0), 4)
    a = rng.standard_normal((2, 2))
    a = a + a.T
    a -= np.trace(a) / 2 * np.eye(2)
    kap = solve_kappa_einstein_order(3, 0, SymTensorField.identity(g), SymTensorField.constant(g, a))
    assert np.max(np.abs(kap.values)) < 1e-12


def test_partial_evenness():
    m = geon_normal_series(GeonSpec(5, (1.0, 1.0, 1.0)))
    assert partial_evenness_check(m) == (True, None)
    c = m.h.coeffs.copy()
    c[1] += 0.01 * np.eye(4)
    bad = NormalFormMetric(5, m.grid, TensorSeries(c, m.grid))
    assert partial_evenness_check(bad) == (False, 1)
