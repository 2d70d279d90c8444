#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

Runs the two hot loops (norm quadrature along a long periodic measure and
batched projective m-function sweeps) through both backends and prints a
small table.  Invoke from the repository root:

    python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from radialspec._kernels import pure

try:
    from radialspec._kernels import _native
    BACKENDS = [("pure", pure), ("native", _native)]
except ImportError:
    _native = None
    BACKENDS = [("pure", pure)]


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_simon_stolz(impl):
    breaks = np.arange(0.0, 2001.0, 1.0)
    sqrtb = np.full(len(breaks) - 2, 2.0)
    k = math.pi / 2

    def work():
        impl.simon_stolz_sweep(breaks, sqrtb, k, 1.0 / 16.0)

    return best_of(work)


def bench_riccati(impl):
    rng = np.random.default_rng(0)
    pos = np.sort(rng.uniform(0.5, 60.0, size=50))[::-1].copy()
    sqrtb = rng.uniform(1.1, 3.0, size=50)
    zs = [complex(rng.uniform(-3, 6), 10 ** rng.uniform(-3, 0.5))
          for _ in range(2000)]

    def work():
        for z in zs:
            k = complex(np.sqrt(complex(z)))
            if k.imag < 0:
                k = -k
            impl.riccati_left_sweep(pos, sqrtb, k, 61.0, 0.0, 1.0, 1j * k)

    return best_of(work)


def main():
    jobs = [("simon_stolz_sweep (128k midpoints)", bench_simon_stolz),
            ("riccati_left_sweep (2000 x 50 atoms)", bench_riccati)]
    results = {}
    for name, impl in BACKENDS:
        for job, fn in jobs:
            results[(job, name)] = fn(impl)
    width = max(len(j) for j, _ in jobs)
    header = f"{'kernel':<{width}}  {'pure [ms]':>10}  {'native [ms]':>11}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for job, _ in jobs:
        p = results[(job, "pure")] * 1e3
        if _native is not None:
            n = results[(job, "native")] * 1e3
            print(f"{job:<{width}}  {p:10.2f}  {n:11.2f}  {p / n:7.1f}x")
        else:
            print(f"{job:<{width}}  {p:10.2f}  {'-':>11}  {'-':>8}")
    if _native is None:
        print("\ncompiled kernels unavailable; rebuild with Cython to compare")


if __name__ == "__main__":
    main()
