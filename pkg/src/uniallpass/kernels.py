"""Hot numeric loops with optional numba acceleration.

Two per-sample/per-subset loops dominate runtime at scale: the time-domain
impulse-response recursion and the exhaustive principal-minor sweep used by
the characteristic polynomial and the minor-matching check.  Both are written
as plain Python/numpy functions and compiled with ``numba.njit`` when
available.  Set ``UNIALLPASS_NUMBA=0`` to force the interpreted fallback;
``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    """True when the jitted kernels should be dispatched."""
    flag = os.environ.get("UNIALLPASS_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "off", "no")


def _impulse_loop(a, b, c, d, delays, offsets, length):
    # Delay line i is a ring buffer of size delays[i] living at
    # buf[offsets[i]:offsets[i] + delays[i]].  At step n the slot n % delays[i]
    # holds the line output s_i(n); the freshly computed s_i(n + delays[i])
    # goes back into the same slot.  Column q of the state tracks the response
    # to a unit impulse on input channel q, so one pass yields all P x P
    # responses.
    n_lines = a.shape[0]
    n_io = b.shape[1]
    total = offsets[n_lines]
    buf = np.zeros((total, n_io))
    out = np.zeros((length, n_io, n_io))
    state = np.zeros((n_lines, n_io))
    for n in range(length):
        for i in range(n_lines):
            pos = offsets[i] + n % delays[i]
            for q in range(n_io):
                state[i, q] = buf[pos, q]
        y = np.dot(c, state)
        if n == 0:
            y = y + d
        out[n] = y
        nxt = np.dot(a, state)
        if n == 0:
            nxt = nxt + b
        for i in range(n_lines):
            pos = offsets[i] + n % delays[i]
            for q in range(n_io):
                buf[pos, q] = nxt[i, q]
    return out


def _minors_loop(m):
    # out[mask] = determinant of the principal submatrix selected by the set
    # bits of mask; out[0] = 1 by the empty-product convention.
    n = m.shape[0]
    count = 1 << n
    out = np.empty(count)
    out[0] = 1.0
    idx = np.empty(n, dtype=np.int64)
    for mask in range(1, count):
        k = 0
        for i in range(n):
            if (mask >> i) & 1:
                idx[k] = i
                k += 1
        sub = np.empty((k, k))
        for r in range(k):
            for s in range(k):
                sub[r, s] = m[idx[r], idx[s]]
        out[mask] = np.linalg.det(sub)
    return out


if HAVE_NUMBA:
    _impulse_jit = njit(cache=True)(_impulse_loop)
    _minors_jit = njit(cache=True)(_minors_loop)
else:  # pragma: no cover
    _impulse_jit = _impulse_loop
    _minors_jit = _minors_loop


def impulse_kernel(a, b, c, d, delays, length):
    """Run the time-domain recursion; returns (length, P, P) float64."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    delays = np.ascontiguousarray(delays, dtype=np.int64)
    offsets = np.zeros(len(delays) + 1, dtype=np.int64)
    np.cumsum(delays, out=offsets[1:])
    fn = _impulse_jit if numba_enabled() else _impulse_loop
    return fn(a, b, c, d, delays, offsets, int(length))


def principal_minors_all(m):
    """Determinants of all 2^N principal submatrices, indexed by bitmask."""
    m = np.ascontiguousarray(m, dtype=np.float64)
    n = m.shape[0]
    if n > 20:
        raise ValueError(f"principal-minor sweep limited to N <= 20, got {n}")
    fn = _minors_jit if numba_enabled() else _minors_loop
    return fn(m)
