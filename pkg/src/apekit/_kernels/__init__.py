"""Hot kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it imports; set ``APEKIT_PURE_PYTHON=1`` to
force the fallback.  ``BACKEND`` names whichever was selected.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("APEKIT_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def cauchy_product(a, b):
    """Cauchy product of coefficient stacks of shape (K, ...) with equal trailing shape."""
    shape = a.shape
    out = _impl.cauchy_product(_c(a.reshape(shape[0], -1)), _c(b.reshape(shape[0], -1)))
    return np.asarray(out).reshape(shape)


def cauchy_matmul(a, b):
    """Matrix-valued Cauchy product; inputs (K, ..., d, d) with equal shapes."""
    shape = a.shape
    d = shape[-1]
    out = _impl.cauchy_matmul(_c(a.reshape(shape[0], -1, d, d)), _c(b.reshape(shape[0], -1, d, d)))
    return np.asarray(out).reshape(shape)


def yamabe_system(v, h, H, A, n, robin):
    F, lower, diag, upper = _impl.yamabe_system(_c(v), float(h), _c(H), _c(A), float(n), float(robin))
    return np.asarray(F), np.asarray(lower), np.asarray(diag), np.asarray(upper)


__all__ = ["BACKEND", "cauchy_product", "cauchy_matmul", "yamabe_system"]
