"""Einstein deficit of normal-form metrics g = x^-2 (dx^2 + h_x).

The deficit is E = Ric + (n-1) g, whose g-trace is R + n(n-1).  Components
are reported in the compactified frame: ``e11 = E(d_x, d_x)`` and ``eperp``
the tangential block.  Their g-norm is x^2 times the component size, so the
vanishing order of |E|_g is two more than that of the component series.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import (
    ScalarSeries,
    TensorSeries,
    metric_inverse_series,
    ricci_field,
    ricci_series,
    series_multiply,
)
from .torus import SymTensorField, TorusGrid

ORDER_TOL = 1e-10
EINSTEIN_TOL = 1e-10
TRACE_TOL = 1e-12


@dataclass(frozen=True)
class NormalFormMetric:
    """A metric x^-2 (dx^2 + h_x) on (0, eps) x T^(n-1), with h_x a truncated series."""

    n: int
    grid: TorusGrid
    h: TensorSeries
    lam: int | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("bulk dimension n must be >= 3")
        if self.grid.boundary_dim != self.n - 1:
            raise ValueError(f"grid boundary_dim {self.grid.boundary_dim} != n-1 = {self.n - 1}")
        h = self.h
        if h.grid is None:
            h = TensorSeries(h.coeffs, self.grid)
            object.__setattr__(self, "h", h)
        elif h.grid != self.grid:
            raise ValueError("series grid differs from metric grid")
        if h.dim != self.n - 1:
            raise ValueError("tangential block has the wrong size")
        if h.order < self.n + 1:
            raise ValueError(f"truncation order K={h.order} must be >= n+1 = {self.n + 1}")
        if np.any(np.linalg.eigvalsh(h.coeffs[0]) <= 0.0):
            raise ValueError("h_0 is not positive definite")
        if self.lam is not None:
            if self.lam not in (-1, 0, 1):
                raise ValueError("lambda must be -1, 0 or 1")
            check_einstein(self.h0, self.lam, self.n)

    @property
    def K(self) -> int:
        return self.h.order

    @property
    def h0(self) -> SymTensorField:
        return self.h.coefficient(0)

    def with_h(self, h: TensorSeries, lam="same") -> "NormalFormMetric":
        return NormalFormMetric(self.n, self.grid, h, self.lam if lam == "same" else lam)


def check_einstein(h0: SymTensorField, lam: int, n: int, tol: float = EINSTEIN_TOL):
    ric = ricci_field(h0)
    err = np.max(np.abs(ric.values - lam * (n - 2) * h0.values))
    if err > tol:
        raise ValueError(f"boundary metric is not lambda-Einstein (lambda={lam}, error {err:.3e})")


@dataclass(frozen=True)
class DeficitReport:
    e11: ScalarSeries
    eperp: TensorSeries
    a: ScalarSeries
    ape_order: int
    a_order: int
    trace_mismatch: float = field(default=0.0)

    def to_dict(self):
        return {
            "ape_order": self.ape_order,
            "a_order": self.a_order,
            "e11_norms": self.e11.norms().tolist(),
            "eperp_norms": self.eperp.norms().tolist(),
            "a_norms": self.a.norms().tolist(),
            "trace_mismatch": self.trace_mismatch,
        }


def _times_x(s):
    """x * s, raising the truncation order by one."""
    c = np.concatenate([np.zeros((1,) + s.coeffs.shape[1:]), s.coeffs])
    return s._new(c)


def _drop_pole(s, what: str, tol: float = ORDER_TOL):
    """Divide x*E by x, asserting the constant coefficient cancels."""
    c0 = float(np.max(np.abs(s.coeffs[0])))
    if c0 > tol:
        raise ValueError(f"{what}: coefficient of 1/x does not cancel ({c0:.3e}); h_x has a linear term")
    return s._new(s.coeffs[1:])


def deficit_components(m: NormalFormMetric):
    """Series of E11, E_perp and A, each with the 1/x structure multiplied out."""
    n = m.n
    h = m.h
    H = metric_inverse_series(h)
    hp = h.derivative()
    hpp = hp.derivative()
    ric = ricci_series(h)

    tr_hp = series_multiply(H, hp, "trace")
    tr_hpp = series_multiply(H, hpp, "trace")
    Hhp = series_multiply(H, hp)
    sq = series_multiply(Hhp, Hhp, "trace")
    R_h = series_multiply(H, ric, "trace")

    xe11 = _times_x(tr_hpp).scale(-0.5) + tr_hp.scale(0.5) + _times_x(sq).scale(0.25)
    e11 = _drop_pole(xe11, "E11")

    hp_H_hp = series_multiply(hp, Hhp)
    xeperp = (_times_x(ric)
              - _times_x(hpp).scale(0.5)
              + hp.scale(0.5 * (n - 2))
              + series_multiply(tr_hp, h).scale(0.5)
              + _times_x(hp_H_hp).scale(0.5)
              - _times_x(series_multiply(tr_hp, hp)).scale(0.25))
    eperp = _drop_pole(xeperp, "E_perp")
    eperp = TensorSeries(eperp.coeffs, eperp.grid)

    bracket = tr_hpp - sq.scale(0.75) + series_multiply(tr_hp, tr_hp).scale(0.25) - R_h
    a = _times_x(tr_hp).scale(n - 1) - _times_x(_times_x(bracket))
    return e11, eperp, a, H


def einstein_deficit(m: NormalFormMetric, tol: float = ORDER_TOL) -> DeficitReport:
    """Deficit series, |E|_g vanishing order and the vanishing order of A = R + n(n-1)."""
    e11, eperp, a, H = deficit_components(m)
    combo = _times_x(_times_x(e11 + series_multiply(H, eperp, "trace")))
    K = min(combo.order, a.order)
    mismatch = float(np.max(np.abs(combo.coeffs[: K + 1] - a.coeffs[: K + 1])))
    comp = min(e11.lowest_nonzero(tol), eperp.lowest_nonzero(tol))
    return DeficitReport(e11, eperp, a, comp + 2, a.lowest_nonzero(tol), mismatch)


def model_coefficients(n, lam, h0: SymTensorField, theta=None, kappa=None, K=None):
    K = n + 3 if K is None else K
    d = n - 1
    lead = h0.values.shape[:-2]
    c = np.zeros((K + 1,) + lead + (d, d))
    c[0] += h0.values
    if K >= 2:
        c[2] += -0.5 * lam * h0.values
    if K >= 4:
        c[4] += lam * lam / 16.0 * h0.values
    if theta is not None:
        c[n - 1] = c[n - 1] + theta.values / (n - 1)
    if kappa is not None:
        c[n] = c[n] + kappa.values / n
    return c


def _bcast(fields):
    shape = np.broadcast_shapes(*[f.values.shape for f in fields if f is not None])
    return [None if f is None else SymTensorField(f.grid, np.broadcast_to(f.values, shape)) for f in fields]


def build_model_expansion(n, lam, h0: SymTensorField, theta: SymTensorField, kappa: SymTensorField,
                          K: int | None = None) -> NormalFormMetric:
    """h_x = (1 - lam x^2/4)^2 h0 + x^(n-1) theta/(n-1) + x^n kappa/n, higher orders zero."""
    K = n + 3 if K is None else K
    check_einstein(h0, lam, n)
    tr = theta.trace(h0)
    if tr.max_abs() > TRACE_TOL:
        raise ValueError(f"theta is not trace-free with respect to h0 (max trace {tr.max_abs():.3e})")
    h0, theta, kappa = _bcast([h0, theta, kappa])
    c = model_coefficients(n, lam, h0, theta, kappa, K)
    return NormalFormMetric(n, h0.grid, TensorSeries(c, h0.grid), lam)


def _sym_basis(d):
    out = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1.0
            out.append(e)
    return out


def solve_kappa_einstein_order(n, lam, h0: SymTensorField, theta: SymTensorField, K: int | None = None):
    """The kappa that removes the order-n part of E_perp's g-norm, solved node by node.

    The tangential deficit coefficient at x^(n-2) is affine in kappa; it is
    probed on a basis of symmetric matrices and the resulting linear system is
    solved at every grid node.
    """
    K = n + 2 if K is None else max(K, n + 1)
    d = n - 1
    grid = h0.grid
    h0, theta = _bcast([h0, theta])
    lead = h0.values.shape[:-2]

    def residual(kmat):
        kap = SymTensorField(grid, np.broadcast_to(kmat, lead + (d, d)))
        met = build_model_expansion(n, lam, h0, theta, kap, K)
        e11, eperp, _, _ = deficit_components(met)
        return eperp.coeffs[n - 2]

    base = residual(np.zeros((d, d)))
    basis = _sym_basis(d)
    iu = np.triu_indices(d)
    cols = [(residual(e) - base)[..., iu[0], iu[1]] for e in basis]
    M = np.stack(cols, axis=-1)
    rhs = -base[..., iu[0], iu[1]]
    cond = np.linalg.cond(M)
    if np.any(~np.isfinite(cond)) or np.any(cond > 1e12):
        raise ValueError("kappa system is singular")
    sol = np.linalg.solve(M, rhs[..., None])[..., 0]
    kap = np.zeros(lead + (d, d))
    for idx, e in enumerate(basis):
        kap = kap + sol[..., idx, None, None] * e
    return SymTensorField(grid, kap)


def partial_evenness_check(m: NormalFormMetric, tol: float = 1e-12):
    """(True, None) when every odd coefficient below x^(n-1) vanishes, else (False, first odd order)."""
    for k in range(1, min(m.n - 1, m.K + 1), 2):
        if np.max(np.abs(m.h.coeffs[k])) > tol:
            return False, k
    return True, None
