"""Timing comparison of the jitted kernels against the interpreted loops.

Run:  python benchmarks/bench_kernels.py
The same selection can be forced package-wide with UNIALLPASS_NUMBA=0.
"""

import time

import numpy as np

from uniallpass import design_homogeneous_siso
from uniallpass.kernels import (
    HAVE_NUMBA,
    _impulse_jit,
    _impulse_loop,
    _minors_jit,
    _minors_loop,
)


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def impulse_case(length):
    design = design_homogeneous_siso([13, 22, 1, 10, 5, 3], 0.99)
    fdn = design.fdn
    delays = fdn.delays.as_array()
    offsets = np.zeros(len(delays) + 1, dtype=np.int64)
    np.cumsum(delays, out=offsets[1:])
    return (fdn.a, fdn.b, fdn.c, fdn.d, delays, offsets, length)


def main():
    print(f"numba available: {HAVE_NUMBA}")
    rows = []

    args = impulse_case(48_000)
    if HAVE_NUMBA:
        _impulse_jit(*impulse_case(8))  # compile outside the timing
    t_py = timeit(_impulse_loop, *args)
    t_jit = timeit(_impulse_jit, *args) if HAVE_NUMBA else float("nan")
    rows.append(("impulse response, 6 lines x 48k samples", t_py, t_jit))

    m = np.ascontiguousarray(np.random.default_rng(0).standard_normal((13, 13)))
    if HAVE_NUMBA:
        _minors_jit(np.eye(2))
    t_py = timeit(_minors_loop, m)
    t_jit = timeit(_minors_jit, m) if HAVE_NUMBA else float("nan")
    rows.append(("principal minors, 13 lines (8192 subsets)", t_py, t_jit))

    print(f"{'kernel':<45} {'python':>10} {'numba':>10} {'speedup':>8}")
    for name, t_py, t_jit in rows:
        speed = t_py / t_jit if t_jit == t_jit and t_jit > 0 else float("nan")
        print(f"{name:<45} {t_py:>9.3f}s {t_jit:>9.3f}s {speed:>7.1f}x")


if __name__ == "__main__":
    main()
