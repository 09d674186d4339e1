"""Flat torus grids and sampled boundary fields.

Fields carry a ``values`` array whose leading axes are either absent (a
translation-invariant field, stored once) or equal to ``grid.shape``.  All
numerics broadcast over that leading block, so constant fields never touch
the grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on a flat torus with cycle lengths ``periods``."""

    boundary_dim: int
    periods: tuple
    samples_per_axis: int = 8

    def __post_init__(self):
        periods = tuple(float(p) for p in self.periods)
        object.__setattr__(self, "periods", periods)
        if self.boundary_dim < 1:
            raise ValueError("boundary_dim must be >= 1")
        if len(periods) != self.boundary_dim:
            raise ValueError(f"expected {self.boundary_dim} periods, got {len(periods)}")
        if any(not p > 0 for p in periods):
            raise ValueError("all periods must be positive")
        if self.samples_per_axis < 4 or self.samples_per_axis % 2:
            raise ValueError("samples_per_axis must be even and >= 4")

    @property
    def shape(self):
        return (self.samples_per_axis,) * self.boundary_dim

    @property
    def volume(self) -> float:
        return float(np.prod(self.periods))

    def axis_nodes(self, axis: int) -> np.ndarray:
        S = self.samples_per_axis
        return self.periods[axis] * np.arange(S) / S

    def coordinates(self):
        """Tuple of node-coordinate arrays, each of shape ``grid.shape``."""
        axes = [self.axis_nodes(a) for a in range(self.boundary_dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        S = self.samples_per_axis
        k = 2.0 * np.pi * np.fft.fftfreq(S, d=self.periods[axis] / S)
        k[S // 2] = 0.0  # Nyquist mode has no odd partner on an even grid
        return k

    def to_dict(self):
        return {"n": self.boundary_dim + 1, "periods": list(self.periods), "samples": self.samples_per_axis}


def lead_ndim(values: np.ndarray, grid: TorusGrid, comp_ndim: int, offset: int = 0) -> int:
    nd = values.ndim - comp_ndim - offset
    if nd == 0:
        return 0
    if values.shape[offset:offset + nd] != grid.shape:
        raise ValueError(f"field samples {values.shape[offset:offset + nd]} do not match grid {grid.shape}")
    return nd


def spectral_diff_array(values, grid: TorusGrid, axis: int, offset: int = 0, comp_ndim: int = 0):
    """Fourier derivative of a stacked array along grid ``axis``.

    ``offset`` leading axes (e.g. series order) precede the grid block and
    ``comp_ndim`` component axes follow it.  Constant arrays map to zero.
    """
    if not 0 <= axis < grid.boundary_dim:
        raise ValueError(f"axis {axis} out of range for boundary_dim {grid.boundary_dim}")
    values = np.asarray(values, dtype=float)
    if lead_ndim(values, grid, comp_ndim, offset) == 0:
        return np.zeros_like(values)
    ax = offset + axis
    k = grid.wavenumbers(axis)
    k = k.reshape((-1,) + (1,) * (values.ndim - ax - 1))
    return np.real(np.fft.ifft(1j * k * np.fft.fft(values, axis=ax), axis=ax))


class ScalarField:
    """Real samples of a boundary function."""

    comp_ndim = 0

    def __init__(self, grid: TorusGrid, values):
        self.grid = grid
        self.values = _frozen(values)
        lead_ndim(self.values, grid, self.comp_ndim)

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, float(value))

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, np.broadcast_to(func(*grid.coordinates()), grid.shape))

    @property
    def is_constant(self) -> bool:
        return self.values.ndim == self.comp_ndim

    def on_grid(self) -> np.ndarray:
        return np.broadcast_to(self.values, self.grid.shape + self.values.shape[self.values.ndim - self.comp_ndim:])

    def _wrap(self, values):
        return type(self)(self.grid, values)

    def __add__(self, other):
        return self._wrap(self.values + _vals(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - _vals(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def __mul__(self, other):
        if isinstance(other, SymTensorField):
            return NotImplemented
        o = _vals(other)
        if isinstance(other, ScalarField) and self.comp_ndim:
            o = o[..., None, None]
        return self._wrap(self.values * o)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __repr__(self):
        kind = "constant" if self.is_constant else f"grid{self.grid.shape}"
        return f"{type(self).__name__}({kind})"


class SymTensorField(ScalarField):
    """Symmetric (n-1)x(n-1) matrices at every node, symmetrized exactly on construction."""

    comp_ndim = 2

    def __init__(self, grid: TorusGrid, values):
        v = np.array(values, dtype=float)
        d = grid.boundary_dim
        if v.shape[-2:] != (d, d):
            raise ValueError(f"expected trailing shape {(d, d)}, got {v.shape[-2:]}")
        asym = np.max(np.abs(v - np.swapaxes(v, -1, -2))) if v.size else 0.0
        if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(v)))):
            raise ValueError(f"tensor field is not symmetric (max asymmetry {asym:.3e})")
        super().__init__(grid, 0.5 * (v + np.swapaxes(v, -1, -2)))

    @classmethod
    def constant(cls, grid, matrix):
        return cls(grid, np.asarray(matrix, dtype=float))

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.eye(grid.boundary_dim))

    def trace(self, metric: "SymTensorField | None" = None) -> ScalarField:
        """Trace with respect to ``metric`` (flat identity when omitted)."""
        if metric is None:
            return ScalarField(self.grid, np.trace(self.values, axis1=-2, axis2=-1))
        inv = np.linalg.inv(metric.values)
        return ScalarField(self.grid, np.einsum("...ij,...ji->...", inv, self.values))

    def eigenvalues(self, metric: "SymTensorField | None" = None) -> np.ndarray:
        """Eigenvalues of the endomorphism metric^{-1} * self, ascending, per node."""
        if metric is None:
            return np.linalg.eigvalsh(self.values)
        L = np.linalg.cholesky(metric.values)
        Li = np.linalg.inv(L)
        return np.linalg.eigvalsh(Li @ self.values @ np.swapaxes(Li, -1, -2))

    def is_positive_definite(self) -> bool:
        return bool(np.all(np.linalg.eigvalsh(self.values) > 0.0))

    def sqrt_det(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt(np.linalg.det(self.values)))


def _vals(x):
    return x.values if isinstance(x, ScalarField) else x


def spectral_derivative(f: ScalarField, axis: int) -> ScalarField:
    """Partial derivative along ``axis`` by discrete Fourier differentiation."""
    return type(f)(f.grid, spectral_diff_array(f.values, f.grid, axis, comp_ndim=f.comp_ndim))


def integrate(f: ScalarField) -> float:
    """Integral against the flat coordinate measure; the periodic trapezoid rule is the sample mean."""
    if f.comp_ndim:
        raise TypeError("integrate expects a scalar field")
    return float(np.mean(f.values)) * f.grid.volume
