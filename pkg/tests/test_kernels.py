import numpy as np
import pytest

from conftest import random_stable_fdn
from uniallpass import impulse_response, principal_minor_list
from uniallpass.kernels import (
    HAVE_NUMBA,
    _impulse_loop,
    _impulse_jit,
    _minors_loop,
    _minors_jit,
    numba_enabled,
    principal_minors_all,
)


def _impulse_args(fdn, length):
    delays = fdn.delays.as_array()
    offsets = np.zeros(len(delays) + 1, dtype=np.int64)
    np.cumsum(delays, out=offsets[1:])
    return (fdn.a, fdn.b, fdn.c, fdn.d, delays, offsets, length)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_jit_and_python_impulse_agree(rng):
    for _ in range(5):
        fdn = random_stable_fdn(rng, n=int(rng.integers(1, 5)), p=int(rng.integers(1, 3)))
        args = _impulse_args(fdn, 40)
        np.testing.assert_allclose(_impulse_jit(*args), _impulse_loop(*args), atol=1e-14)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_jit_and_python_minors_agree(rng):
    m = np.ascontiguousarray(rng.standard_normal((6, 6)))
    np.testing.assert_allclose(_minors_jit(m), _minors_loop(m), atol=1e-12)


def test_env_flag_selects_fallback(rng, monkeypatch):
    fdn = random_stable_fdn(rng, n=3)
    monkeypatch.setenv("UNIALLPASS_NUMBA", "0")
    assert not numba_enabled()
    h_fallback = impulse_response(fdn, 32)
    monkeypatch.delenv("UNIALLPASS_NUMBA")
    h_default = impulse_response(fdn, 32)
    np.testing.assert_allclose(h_fallback, h_default, atol=1e-14)


def test_principal_minors_indexing(rng):
    m = rng.standard_normal((4, 4))
    all_minors = principal_minors_all(m)
    assert all_minors[0] == 1.0
    subsets, ordered = principal_minor_list(m)
    for subset, value in zip(subsets, ordered):
        mask = sum(1 << i for i in subset)
        assert all_minors[mask] == pytest.approx(value)


def test_minor_sweep_size_guard():
    with pytest.raises(ValueError):
        principal_minors_all(np.eye(21))
