"""Asymptotic expansions, mass and curvature tools for metrics with flat toroidal conformal infinity."""
from ._kernels import BACKEND
from .torus import ScalarField, SymTensorField, TorusGrid, integrate, spectral_derivative
from .series import (
    ScalarSeries,
    TensorSeries,
    metric_inverse_series,
    ricci_field,
    ricci_series,
    series_compose,
    series_multiply,
    series_revert,
)

__version__ = "0.1.0"
