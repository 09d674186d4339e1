"""Reference (numpy) implementations of the hot kernels.

These define the semantics; ``_ckernels.pyx`` must agree with them to
round-off.  Arrays are assumed float64 and C-contiguous, exactly as the
dispatcher in ``apekit._kernels`` prepares them.
"""
import numpy as np


def cauchy_product(a, b):
    """Truncated Cauchy product of (K, P) coefficient stacks."""
    K, P = a.shape
    out = np.zeros((K, P))
    for k in range(K):
        out[k] = np.einsum("jp,jp->p", a[: k + 1], b[k::-1])
    return out


def cauchy_matmul(a, b):
    """Truncated Cauchy product with a matrix product at every node, (K, P, d, d)."""
    K = a.shape[0]
    out = np.zeros(a.shape)
    for k in range(K):
        for j in range(k + 1):
            out[k] += a[j] @ b[k - j]
    return out


def yamabe_system(v, h, H, A, n, robin):
    """Residual and tridiagonal Jacobian of the radial Yamabe collocation system.

    Unknown ``v = phi - 1`` on ``rho_i = i*h``; node 0 is the central torus
    (ghost symmetry), node M carries the Robin closure ``v' = -robin*v``.
    """
    M = v.shape[0] - 1
    kap = 4.0 * (n - 1.0) / (n - 2.0)
    q = 4.0 / (n - 2.0)
    p = (n + 2.0) / (n - 2.0)
    h2 = h * h

    lap = np.empty(M + 1)
    dl = np.zeros(M)  # d lap_i / d v_{i-1}, i = 1..M
    dd = np.empty(M + 1)
    du = np.zeros(M)  # d lap_i / d v_{i+1}, i = 0..M-1

    lap[0] = 4.0 * (v[1] - v[0]) / h2
    dd[0] = -4.0 / h2
    du[0] = 4.0 / h2

    Hi = H[1:M]
    lap[1:M] = (v[2:] - 2.0 * v[1:M] + v[:M - 1]) / h2 + Hi * (v[2:] - v[:M - 1]) / (2.0 * h)
    dl[: M - 1] = 1.0 / h2 - Hi / (2.0 * h)
    dd[1:M] = -2.0 / h2
    du[1:M] = 1.0 / h2 + Hi / (2.0 * h)

    lap[M] = (2.0 * v[M - 1] - (2.0 + 2.0 * h * robin) * v[M]) / h2 - H[M] * robin * v[M]
    dl[M - 1] = 2.0 / h2
    dd[M] = -(2.0 + 2.0 * h * robin) / h2 - H[M] * robin

    onev = 1.0 + v
    nonlin = onev * np.expm1(q * np.log1p(v))
    dnonlin = p * np.exp(q * np.log1p(v)) - 1.0

    c = n * (n - 1.0)
    F = -kap * lap + c * nonlin + A * onev
    diag = -kap * dd + c * dnonlin + A
    return F, -kap * dl, diag, -kap * du
