# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of ``_pykernels``; same signatures and semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport expm1, log1p, exp

cnp.import_array()


def cauchy_product(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t K = a.shape[0], P = a.shape[1]
    cdef Py_ssize_t k, j, p
    out = np.zeros((K, P))
    cdef double[:, ::1] o = out
    for k in range(K):
        for j in range(k + 1):
            for p in range(P):
                o[k, p] += a[j, p] * b[k - j, p]
    return out


def cauchy_matmul(const double[:, :, :, ::1] a, const double[:, :, :, ::1] b):
    cdef Py_ssize_t K = a.shape[0], P = a.shape[1], d = a.shape[2]
    cdef Py_ssize_t k, j, p, r, s, t
    cdef double acc
    out = np.zeros((K, P, d, d))
    cdef double[:, :, :, ::1] o = out
    for k in range(K):
        for j in range(k + 1):
            for p in range(P):
                for r in range(d):
                    for s in range(d):
                        acc = 0.0
                        for t in range(d):
                            acc = acc + a[j, p, r, t] * b[k - j, p, t, s]
                        o[k, p, r, s] += acc
    return out


def yamabe_system(const double[::1] v, double h, const double[::1] H,
                  const double[::1] A, double n, double robin):
    cdef Py_ssize_t M = v.shape[0] - 1
    cdef Py_ssize_t i
    cdef double kap = 4.0 * (n - 1.0) / (n - 2.0)
    cdef double q = 4.0 / (n - 2.0)
    cdef double p = (n + 2.0) / (n - 2.0)
    cdef double c = n * (n - 1.0)
    cdef double h2 = h * h
    cdef double lap, ddi, lg
    F_ = np.empty(M + 1)
    diag_ = np.empty(M + 1)
    lower_ = np.zeros(M)
    upper_ = np.zeros(M)
    cdef double[::1] F = F_
    cdef double[::1] diag = diag_
    cdef double[::1] lower = lower_
    cdef double[::1] upper = upper_

    for i in range(M + 1):
        if i == 0:
            lap = 4.0 * (v[1] - v[0]) / h2
            ddi = -4.0 / h2
            upper[0] = -kap * 4.0 / h2
        elif i < M:
            lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2 + H[i] * (v[i + 1] - v[i - 1]) / (2.0 * h)
            ddi = -2.0 / h2
            lower[i - 1] = -kap * (1.0 / h2 - H[i] / (2.0 * h))
            upper[i] = -kap * (1.0 / h2 + H[i] / (2.0 * h))
        else:
            lap = (2.0 * v[M - 1] - (2.0 + 2.0 * h * robin) * v[M]) / h2 - H[M] * robin * v[M]
            ddi = -(2.0 + 2.0 * h * robin) / h2 - H[M] * robin
            lower[M - 1] = -kap * 2.0 / h2
        lg = log1p(v[i])
        F[i] = -kap * lap + c * (1.0 + v[i]) * expm1(q * lg) + A[i] * (1.0 + v[i])
        diag[i] = -kap * ddi + c * (p * exp(q * lg) - 1.0) + A[i]
    return F_, lower_, diag_, upper_
