"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from apekit._kernels import BACKEND, _pykernels

try:
    from apekit._kernels import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    K, m, d = 12, 64, 3
    a = rng.standard_normal((K, m))
    b = rng.standard_normal((K, m))
    A = rng.standard_normal((K, m, d, d))
    B = rng.standard_normal((K, m, d, d))
    N = 2000
    v = -1e-3 * rng.random(N)
    H = 1.0 + rng.random(N)
    Adef = rng.random(N)
    return {
        "cauchy_product": lambda mod: mod.cauchy_product(a, b),
        "cauchy_matmul": lambda mod: mod.cauchy_matmul(A, B),
        "yamabe_system": lambda mod: mod.yamabe_system(v, 0.02, H, Adef, 3.0, 0.06),
    }


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    print(f"selected backend: {BACKEND}")
    if _ckernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<16}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, call in cases(rng).items():
        tp = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<16}{tp:>14.3f}{'-':>16}{'-':>10}")
            continue
        tc = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{tp:>14.3f}{tc:>16.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
