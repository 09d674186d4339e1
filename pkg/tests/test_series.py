import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from apekit.serialize import dumps, from_json, to_json
from apekit.series import (
    ScalarSeries,
    TensorSeries,
    metric_inverse_series,
    ricci_field,
    ricci_series,
    series_compose,
    series_divide,
    series_exp,
    series_log,
    series_multiply,
    series_revert,
)
from apekit.torus import ScalarField, SymTensorField, TorusGrid

coeffs = arrays(np.float64, 6, elements=st.floats(-2, 2))


@given(coeffs, coeffs)
def test_scalar_product_matches_polynomial_product(a, b):
    got = series_multiply(ScalarSeries(a), ScalarSeries(b)).coeffs
    np.testing.assert_allclose(got, np.convolve(a, b)[:6], atol=1e-12)


@given(coeffs)
def test_exp_log_roundtrip(a):
    s = ScalarSeries(a)
    back = series_log(series_exp(s))
    np.testing.assert_allclose(back.coeffs, a, atol=1e-11)


@given(coeffs, coeffs)
def test_divide_inverts_multiply(a, b):
    b = b.copy()
    b[0] = 1.5 + abs(b[0])
    prod = series_multiply(ScalarSeries(a), ScalarSeries(b))
    np.testing.assert_allclose(series_divide(prod, ScalarSeries(b)).coeffs, a, atol=1e-10)


@given(arrays(np.float64, 5, elements=st.floats(-1, 1)), coeffs)
def test_revert_and_compose(tail, f):
    g = np.concatenate([[0.0, 1.0 + 0.5 * abs(tail[0])], tail[1:]])
    gs = ScalarSeries(g)
    inv = series_revert(gs)
    ident = np.zeros(6)
    ident[1] = 1.0
    np.testing.assert_allclose(series_compose(gs, inv, require_tangent=False).coeffs, ident, atol=1e-10)
    fs = ScalarSeries(f)
    np.testing.assert_allclose(series_compose(series_compose(fs, gs, require_tangent=False), inv, require_tangent=False).coeffs, f, atol=1e-9)


def test_revert_requires_tangent():
    with pytest.raises(ValueError):
        series_revert(ScalarSeries([0.0, 0.0, 1.0]))


def test_metric_inverse(rng):
    c = rng.standard_normal((6, 3, 3))
    c = c + np.swapaxes(c, -1, -2)
    c[0] = 3 * np.eye(3)
    h = TensorSeries(c)
    prod = series_multiply(h, metric_inverse_series(h)).coeffs
    target = np.zeros_like(prod)
    target[0] = np.eye(3)
    np.testing.assert_allclose(prod, target, atol=1e-13)


def test_ricci_of_conformally_flat_surface():
    # on a surface h = e^(2 psi) delta has Ric = -Delta_flat(psi) delta
    g = TorusGrid(2, (2 * np.pi, 3.0), 32)
    X, Y = g.coordinates()
    psi = 0.3 * np.sin(X) * np.cos(2 * np.pi * Y / 3)
    h = SymTensorField(g, np.exp(2 * psi)[..., None, None] * np.eye(2))
    lap = -psi * (1 + (2 * np.pi / 3) ** 2)
    np.testing.assert_allclose(ricci_field(h).values, -lap[..., None, None] * np.eye(2), atol=1e-12)


def test_linearized_ricci_against_finite_difference(rng):
    g = TorusGrid(3, (1.0, 1.2, 0.8), 8)
    X, Y, Z = g.coordinates()
    k = np.zeros(g.shape + (3, 3))
    k[..., 0, 1] = k[..., 1, 0] = np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Z / 0.8)
    k[..., 2, 2] = np.cos(2 * np.pi * Y / 1.2)
    k[..., 0, 0] = 0.5 * np.sin(2 * np.pi * (X + Y / 1.2))
    c = np.zeros((2,) + g.shape + (3, 3))
    c[0] = np.eye(3)
    c[1] = k
    lin = ricci_series(TensorSeries(c, g)).coeffs[1]
    t = 1e-5
    plus = ricci_field(SymTensorField(g, np.eye(3) + t * k)).values
    minus = ricci_field(SymTensorField(g, np.eye(3) - t * k)).values
    fd = (plus - minus) / (2 * t)
    np.testing.assert_allclose(lin, fd, atol=1e-7)


def test_serialize_roundtrip_and_determinism(rng):
    g = TorusGrid(2, (1.0, 2.0), 4)
    c = rng.standard_normal((4,) + g.shape + (2, 2))
    c = c + np.swapaxes(c, -1, -2)
    s = TensorSeries(c, g)
    text = to_json(s)
    back = from_json(text)
    np.testing.assert_array_equal(back.coeffs, s.coeffs)
    assert to_json(back) == text
    f = ScalarField(g, rng.standard_normal(g.shape))
    np.testing.assert_array_equal(from_json(to_json(f)).values, f.values)
    assert dumps({"a": 0.1, "b": [1, 2.5]}, indent=None) == '{"a": 0.10000000000000001, "b": [1, 2.5]}'
