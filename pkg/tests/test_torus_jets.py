import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apekit import jets
from apekit.jets import Jet
from apekit.torus import ScalarField, SymTensorField, TorusGrid, integrate, spectral_derivative


def test_grid_validation():
    with pytest.raises(ValueError):
        TorusGrid(2, (1.0, 1.0), 5)
    with pytest.raises(ValueError):
        TorusGrid(2, (1.0, -1.0), 8)
    with pytest.raises(ValueError):
        TorusGrid(2, (1.0,), 8)


@given(st.integers(1, 3), st.floats(0.5, 3.0))
def test_spectral_derivative_of_trig_mode(k, L):
    g = TorusGrid(2, (L, 1.0), 16)
    f = ScalarField.from_function(g, lambda X, Y: np.sin(2 * np.pi * k * X / L))
    d = spectral_derivative(f, 0)
    X, _ = g.coordinates()
    np.testing.assert_allclose(d.values, 2 * np.pi * k / L * np.cos(2 * np.pi * k * X / L), atol=1e-11)


def test_integrate_is_exact_for_band_limited():
    g = TorusGrid(2, (2.0, 3.0), 8)
    f = ScalarField.from_function(g, lambda X, Y: 1.0 + np.cos(np.pi * X) * np.sin(2 * np.pi * Y / 3))
    assert integrate(f) == pytest.approx(6.0, rel=1e-14)


def test_tensor_field_checks():
    g = TorusGrid(2, (1.0, 1.0), 4)
    with pytest.raises(ValueError):
        SymTensorField(g, np.array([[1.0, 2.0], [0.0, 1.0]]))
    t = SymTensorField.constant(g, np.diag([2.0, 3.0]))
    assert t.trace().values == pytest.approx(5.0)
    assert t.is_positive_definite()
    assert float(t.sqrt_det().values) == pytest.approx(math.sqrt(6.0))


@given(st.floats(0.1, 2.0))
def test_jet_elementary_derivatives(t):
    X = Jet.variable(t, 3)
    e = jets.exp(jets.sinh(X))
    # d/dt exp(sinh t) = cosh t exp(sinh t)
    assert e.deriv(1) == pytest.approx(math.cosh(t) * math.exp(math.sinh(t)), rel=1e-13)
    th = jets.tanh(X)
    assert th.deriv(1) == pytest.approx(1 - math.tanh(t) ** 2, rel=1e-12)
    assert th.deriv(2) == pytest.approx(-2 * math.tanh(t) * (1 - math.tanh(t) ** 2), rel=1e-11, abs=1e-14)
    p = (X * X + 1.0) ** 0.5
    assert p.deriv(1) == pytest.approx(t / math.sqrt(t * t + 1), rel=1e-13)
    q = 1.0 / jets.log(X + 2.0)
    assert q.deriv(1) == pytest.approx(-1 / ((t + 2) * math.log(t + 2) ** 2), rel=1e-12)
