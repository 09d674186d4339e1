"""Truncated power series in the defining function x with boundary-field coefficients.

A series stores one array ``coeffs`` of shape ``(K+1,) + lead + comp`` where
``lead`` is either ``()`` (translation invariant) or ``grid.shape`` and
``comp`` is ``()`` for scalars or ``(d, d)`` for tensors.  Coefficient ``k``
multiplies ``x**k``.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels, _taylor
from .torus import ScalarField, SymTensorField, TorusGrid, lead_ndim, spectral_diff_array

TANGENCY_TOL = 1e-12


class _Series:
    comp_ndim = 0
    field_type = ScalarField

    def __init__(self, coeffs, grid: TorusGrid | None = None):
        c = np.array(coeffs, dtype=float)
        if c.ndim < 1 + self.comp_ndim:
            raise ValueError("coefficient array has too few axes")
        if grid is None:
            if c.ndim != 1 + self.comp_ndim:
                raise ValueError("gridded coefficients require a grid")
        else:
            lead_ndim(c, grid, self.comp_ndim, offset=1)
        c.setflags(write=False)
        self.coeffs = c
        self.grid = grid

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def is_constant(self) -> bool:
        return self.coeffs.ndim == 1 + self.comp_ndim

    @property
    def lead_shape(self):
        return self.coeffs.shape[1:self.coeffs.ndim - self.comp_ndim]

    def _new(self, coeffs, grid="same"):
        return type(self)(coeffs, self.grid if grid == "same" else grid)

    def coefficient(self, k: int):
        """Coefficient of x**k as a boundary field (a plain array when the series has no grid)."""
        if k > self.order:
            raise IndexError(f"order {k} beyond truncation {self.order}")
        if self.grid is None:
            return self.coeffs[k]
        return self.field_type(self.grid, self.coeffs[k])

    def evaluate(self, x):
        """Sum of the truncated series at a real ``x`` (per node)."""
        return _taylor.evaluate(self.coeffs, x)

    def truncate(self, K: int):
        return self._new(self.coeffs[: K + 1])

    def pad(self, K: int):
        if K <= self.order:
            return self.truncate(K)
        extra = np.zeros((K - self.order,) + self.coeffs.shape[1:])
        return self._new(np.concatenate([self.coeffs, extra]))

    def derivative(self):
        """d/dx; truncation drops by one."""
        return self._new(_taylor.derivative(self.coeffs))

    def times_power(self, p: int):
        """Multiply by x**p keeping the truncation order."""
        c = np.zeros_like(self.coeffs)
        if p <= self.order:
            c[p:] = self.coeffs[: self.order + 1 - p]
        return self._new(c)

    def divide_power(self, p: int, tol: float = 1e-10):
        """Divide by x**p; the first p coefficients must vanish to ``tol``."""
        low = np.max(np.abs(self.coeffs[:p])) if p else 0.0
        if low > tol:
            bad = next(k for k in range(p) if np.max(np.abs(self.coeffs[k])) > tol)
            raise ValueError(f"coefficient of x^{bad} does not vanish ({np.max(np.abs(self.coeffs[bad])):.3e})")
        return self._new(self.coeffs[p:])

    def norms(self):
        """Sup-norm of every coefficient."""
        axes = tuple(range(1, self.coeffs.ndim))
        return np.max(np.abs(self.coeffs), axis=axes) if axes else np.abs(self.coeffs)

    def lowest_nonzero(self, tol: float = 1e-10) -> int:
        """First order whose coefficient sup-norm exceeds ``tol``; ``order + 1`` if none."""
        big = np.nonzero(self.norms() > tol)[0]
        return int(big[0]) if big.size else self.order + 1

    def on_grid(self):
        if self.grid is None or not self.is_constant:
            return self
        shape = (self.coeffs.shape[0],) + self.grid.shape + self.coeffs.shape[1:]
        return self._new(np.broadcast_to(self.coeffs[(slice(None),) + (None,) * self.grid.boundary_dim], shape))

    def __add__(self, other):
        a, b, grid = _align(self, other)
        return self._new(a + b, grid)

    def __sub__(self, other):
        a, b, grid = _align(self, other)
        return self._new(a - b, grid)

    def __neg__(self):
        return self._new(-self.coeffs)

    def scale(self, c):
        """Multiply by a real or a ScalarField (constant in x)."""
        if isinstance(c, ScalarField):
            v = c.values
            if self.comp_ndim:
                v = v[..., None, None]
            out = self.coeffs * v[None]
            grid = c.grid if not c.is_constant else self.grid
            return self._new(out, grid)
        return self._new(self.coeffs * c)

    def __eq__(self, other):
        return (type(self) is type(other) and self.grid == other.grid
                and self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs)))

    __hash__ = None

    def __repr__(self):
        kind = "constant" if self.is_constant else f"grid{self.lead_shape}"
        return f"{type(self).__name__}(K={self.order}, {kind})"


class ScalarSeries(_Series):
    """Truncated series with scalar boundary-field coefficients."""

    @classmethod
    def constant(cls, value, K: int, grid=None):
        c = np.zeros(K + 1)
        c[0] = value
        return cls(c, grid)

    @classmethod
    def identity(cls, K: int, grid=None):
        c = np.zeros(K + 1)
        if K >= 1:
            c[1] = 1.0
        return cls(c, grid)

    @classmethod
    def from_fields(cls, fields, grid=None):
        vals = [f.values if isinstance(f, ScalarField) else np.asarray(f, float) for f in fields]
        shape = np.broadcast_shapes(*[v.shape for v in vals])
        if grid is None and isinstance(fields[0], ScalarField):
            grid = fields[0].grid
        return cls(np.stack([np.broadcast_to(v, shape) for v in vals]), grid)


class TensorSeries(_Series):
    """Truncated series with symmetric (d x d) coefficient fields.

    ``symmetric=False`` admits general matrices (intermediate products).
    """

    comp_ndim = 2
    field_type = SymTensorField

    def __init__(self, coeffs, grid=None, symmetric: bool = True):
        c = np.array(coeffs, dtype=float)
        if c.ndim < 3 or c.shape[-1] != c.shape[-2]:
            raise ValueError("tensor series coefficients must end in square matrices")
        if grid is not None and c.shape[-1] != grid.boundary_dim:
            raise ValueError(f"matrix size {c.shape[-1]} does not match boundary_dim {grid.boundary_dim}")
        if symmetric:
            asym = np.max(np.abs(c - np.swapaxes(c, -1, -2)))
            if asym > 1e-12 * max(1.0, float(np.max(np.abs(c)))):
                raise ValueError(f"tensor series is not symmetric (max asymmetry {asym:.3e})")
            c = 0.5 * (c + np.swapaxes(c, -1, -2))
        self.symmetric = symmetric
        super().__init__(c, grid)

    def _new(self, coeffs, grid="same"):
        c = np.asarray(coeffs)
        sym = self.symmetric and bool(np.allclose(c, np.swapaxes(c, -1, -2), rtol=0, atol=1e-11))
        return TensorSeries(c, self.grid if grid == "same" else grid, symmetric=sym)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[-1]

    def coefficient(self, k: int):
        if not self.symmetric and self.grid is not None:
            raise TypeError("non-symmetric series coefficients are not SymTensorFields; use .coeffs")
        return super().coefficient(k)

    @classmethod
    def from_fields(cls, fields, grid=None):
        vals = [f.values if isinstance(f, ScalarField) else np.asarray(f, float) for f in fields]
        shape = np.broadcast_shapes(*[v.shape for v in vals])
        if grid is None and isinstance(fields[0], ScalarField):
            grid = fields[0].grid
        return cls(np.stack([np.broadcast_to(v, shape) for v in vals]), grid)

    @classmethod
    def constant(cls, matrix, K: int, grid=None):
        m = np.asarray(matrix, dtype=float)
        c = np.zeros((K + 1,) + m.shape)
        c[0] = m
        return cls(c, grid)

    def trace(self) -> ScalarSeries:
        return ScalarSeries(np.trace(self.coeffs, axis1=-2, axis2=-1), self.grid)

    def transpose(self):
        return self._new(np.swapaxes(self.coeffs, -1, -2))


def _grid_of(a, b):
    if a.grid is not None and b.grid is not None and a.grid != b.grid:
        raise ValueError("series live on different grids")
    return a.grid if a.grid is not None else b.grid


def _align(a: _Series, b: _Series, truncate: bool = True):
    """Common grid, truncation and lead shape for two series."""
    if not isinstance(b, _Series):
        raise TypeError(f"cannot combine series with {type(b).__name__}")
    grid = _grid_of(a, b)
    K = min(a.order, b.order) if truncate else None
    ca, cb = a.coeffs[: None if K is None else K + 1], b.coeffs[: None if K is None else K + 1]
    la, lb = a.lead_shape, b.lead_shape
    if la != lb:
        lead = la or lb
        if not la:
            ca = np.broadcast_to(ca.reshape((ca.shape[0],) + (1,) * len(lead) + ca.shape[1:]),
                                 (ca.shape[0],) + lead + ca.shape[1:])
        else:
            cb = np.broadcast_to(cb.reshape((cb.shape[0],) + (1,) * len(lead) + cb.shape[1:]),
                                 (cb.shape[0],) + lead + cb.shape[1:])
    if a.comp_ndim != b.comp_ndim:
        if a.comp_ndim == 0:
            ca = ca[..., None, None]
        else:
            cb = cb[..., None, None]
    return ca, cb, grid


def series_multiply(a: _Series, b: _Series, contract: str = "matmul"):
    """Cauchy product truncated at the common order.

    Scalar factors multiply pointwise.  For two tensor series ``contract``
    selects ``"matmul"`` (matrix product at every node, a TensorSeries) or
    ``"trace"`` (trace of the matrix product, a ScalarSeries).
    """
    ca, cb, grid = _align(a, b)
    ca = np.ascontiguousarray(np.broadcast_to(ca, np.broadcast_shapes(ca.shape, cb.shape)))
    cb = np.ascontiguousarray(np.broadcast_to(cb, ca.shape))
    if a.comp_ndim == 0 and b.comp_ndim == 0:
        return ScalarSeries(_kernels.cauchy_product(ca, cb), grid)
    if a.comp_ndim == 0 or b.comp_ndim == 0:
        out = _kernels.cauchy_product(ca, cb)
        sym = (a if a.comp_ndim else b).symmetric
        return TensorSeries(out, grid, symmetric=sym)
    if contract == "matmul":
        out = _kernels.cauchy_matmul(ca, cb)
        sym = bool(np.allclose(out, np.swapaxes(out, -1, -2), rtol=0, atol=1e-11))
        return TensorSeries(out, grid, symmetric=sym)
    if contract == "trace":
        return ScalarSeries(_cauchy_einsum("...ij,...ji->...", ca, cb), grid)
    raise ValueError(f"unknown contraction {contract!r}")


def _cauchy_einsum(subscripts, a, b):
    K = min(a.shape[0], b.shape[0])
    first = np.einsum(subscripts, a[0], b[0])
    out = np.zeros((K,) + first.shape)
    out[0] = first
    for k in range(1, K):
        for j in range(k + 1):
            out[k] += np.einsum(subscripts, a[j], b[k - j])
    return out


def _inverse_coeffs(c):
    """Coefficients of the matrix-series inverse, (K+1, ..., d, d)."""
    h0 = c[0]
    det = np.linalg.det(h0)
    scale = np.max(np.abs(h0)) ** h0.shape[-1] if h0.size else 1.0
    if np.any(np.abs(det) <= 1e-14 * max(scale, 1e-300)):
        raise ValueError("singular leading coefficient")
    H0 = np.linalg.inv(h0)
    out = np.zeros_like(c)
    out[0] = H0
    for k in range(1, c.shape[0]):
        acc = np.zeros_like(h0)
        for j in range(1, k + 1):
            acc += c[j] @ out[k - j]
        out[k] = -H0 @ acc
    return out


def metric_inverse_series(h: TensorSeries) -> TensorSeries:
    """Series H with h*H = identity through the truncation order."""
    if np.any(np.linalg.eigvalsh(h.coeffs[0]) <= 0.0):
        if np.any(np.abs(np.linalg.det(h.coeffs[0])) < 1e-14):
            raise ValueError("singular leading coefficient")
        raise ValueError("leading coefficient is not positive definite")
    return TensorSeries(_inverse_coeffs(h.coeffs), h.grid)


def series_pow(a: ScalarSeries, p: float) -> ScalarSeries:
    return ScalarSeries(_taylor.power(a.coeffs, p), a.grid)


def series_exp(a: ScalarSeries) -> ScalarSeries:
    return ScalarSeries(_taylor.exp(a.coeffs), a.grid)


def series_log(a: ScalarSeries) -> ScalarSeries:
    return ScalarSeries(_taylor.log(a.coeffs), a.grid)


def series_divide(a: ScalarSeries, b: ScalarSeries) -> ScalarSeries:
    ca, cb, grid = _align(a, b)
    return ScalarSeries(_taylor.div(ca, cb), grid)


def _substitute(fc, sc, comp_ndim):
    """Horner evaluation of f at a series sub with sub[0] = 0."""
    K = min(fc.shape[0], sc.shape[0]) - 1
    s = sc[: K + 1]
    if comp_ndim:
        s = s[..., None, None]
    lead = np.broadcast_shapes(fc.shape[1:], s.shape[1:])
    out = np.zeros((K + 1,) + lead)
    out[0] = fc[K] if K < fc.shape[0] else 0.0
    for k in range(K - 1, -1, -1):
        out = _taylor.mul(out, s)
        out[0] = out[0] + fc[k]
    return out


def series_compose(f: _Series, sub: ScalarSeries, require_tangent: bool = True):
    """Coefficients of f(sub(t)) truncated at the common order.

    ``sub`` must have zero constant term; with ``require_tangent`` it must
    also have unit linear term.
    """
    c0 = np.max(np.abs(sub.coeffs[0]))
    c1 = np.max(np.abs(sub.coeffs[1] - 1.0)) if sub.order >= 1 else 1.0
    if c0 > TANGENCY_TOL or (require_tangent and c1 > TANGENCY_TOL):
        raise ValueError("substitution series must be tangent to the identity (x + O(x^2))")
    grid = _grid_of(f, sub)
    out = _substitute(f.coeffs, sub.coeffs, f.comp_ndim)
    if f.comp_ndim:
        return TensorSeries(out, grid, symmetric=f.symmetric)
    return ScalarSeries(out, grid)


def series_revert(g: ScalarSeries) -> ScalarSeries:
    """Compositional inverse r with g(r(t)) = t, by Newton iteration on coefficients.

    Requires g[0] = 0 and g[1] nonzero at every node.
    """
    if np.max(np.abs(g.coeffs[0])) > TANGENCY_TOL:
        raise ValueError("series to revert must have zero constant term")
    g1 = g.coeffs[1]
    if np.any(np.abs(g1) < 1e-14):
        raise ValueError("series to revert has vanishing linear term")
    K = g.order
    t = np.zeros_like(g.coeffs)
    t[1] = 1.0
    r = np.zeros_like(g.coeffs)
    r[1] = 1.0 / g1
    dg = _taylor.derivative(g.coeffs)
    for _ in range(int(math.ceil(math.log2(K + 1))) + 2):
        resid = _substitute(g.coeffs, r, 0) - t
        slope = _substitute(np.concatenate([dg, np.zeros((1,) + dg.shape[1:])]), r, 0)
        r = r - _taylor.div(resid, slope)
        r[0] = 0.0
    return ScalarSeries(r, g.grid)


def _as_grid_coeffs(c, grid):
    if c.ndim == 3:
        return np.broadcast_to(c.reshape((c.shape[0],) + (1,) * grid.boundary_dim + c.shape[1:]),
                               (c.shape[0],) + grid.shape + c.shape[1:])
    return c


def ricci_coeffs(c, grid: TorusGrid):
    """Ricci-tensor series of a boundary metric series, (K+1, grid..., d, d).

    Christoffel symbols come from spectral boundary derivatives and the
    series inverse; every product is a truncated Cauchy product.
    """
    d = grid.boundary_dim
    if c.ndim == 3:
        return np.zeros_like(c)
    H = _inverse_coeffs(c)
    dG = np.stack([spectral_diff_array(c, grid, a, offset=1, comp_ndim=2) for a in range(d)], axis=-3)
    # lowered symbols [..., l, i, j] = 1/2 (d_i G_jl + d_j G_il - d_l G_ij)
    low =0.5 * (np.einsum("...ijl->...lij", dG) + np.einsum("...jil->...lij", dG)) - 0.5 * dG
    gam = _cauchy_einsum("...kl,...lij->...kij", H, low)
    dgam = np.stack([spectral_diff_array(gam, grid, a, offset=1, comp_ndim=3) for a in range(d)], axis=-4)
    t1 = np.einsum("...kkij->...ij", dgam)
    t2 = np.einsum("...jkki->...ij", dgam)
    tr = np.einsum("...kkl->...l", gam)
    t3 = _cauchy_einsum("...l,...lij->...ij", tr, gam)
    t4 = _cauchy_einsum("...kjl,...lki->...ij", gam, gam)
    ric = t1 - t2 + t3 - t4
    return 0.5 * (ric + np.swapaxes(ric, -1, -2))


def ricci_field(h: SymTensorField) -> SymTensorField:
    """Ricci tensor of a positive-definite boundary metric field."""
    if np.any(np.linalg.eigvalsh(h.values) <= 0.0):
        raise ValueError("boundary metric is not positive definite")
    if h.is_constant:
        return SymTensorField(h.grid, np.zeros_like(h.values))
    return SymTensorField(h.grid, ricci_coeffs(h.values[None], h.grid)[0])


def ricci_series(h: TensorSeries) -> TensorSeries:
    """Ricci tensor of the x-family of boundary metrics, expanded in x."""
    if h.grid is None or h.is_constant:
        return h._new(np.zeros_like(h.coeffs))
    return TensorSeries(ricci_coeffs(h.coeffs, h.grid), h.grid)
