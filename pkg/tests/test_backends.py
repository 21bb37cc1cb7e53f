"""The compiled kernels and the pure-Python fallback agree."""

import numpy as np
import pytest

from yamabe_nondeg import _backend, _kernels_py

try:
    from yamabe_nondeg import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not available")


def test_backend_flag():
    assert _backend.BACKEND in ("compiled", "python")


@needs_compiled
@pytest.mark.parametrize("name", ["cos_series", "sin_series", "versin_series"])
def test_series_parity(name):
    x = np.linspace(0.01, 3.1, 25)
    nterms = np.full(25, 20_000, dtype=np.int64)
    a = np.asarray(getattr(compiled, name)(x, 3, nterms))
    b = np.asarray(getattr(_kernels_py, name)(x, 3, nterms))
    assert np.max(np.abs(a - b)) <= 1e-14


@needs_compiled
def test_lattice_parity(rng):
    k = 17
    w, v = rng.normal(size=k - 1), rng.normal(size=k - 1)
    table = np.cos(2 * np.pi * np.arange(k) / k)
    modes = np.arange(k, dtype=np.int64)
    a = np.asarray(compiled.lattice_sums(w, v, table, modes))
    b = np.asarray(_kernels_py.lattice_sums(w, v, table, modes))
    assert np.max(np.abs(a - b)) <= 1e-14


def test_pure_lattice_definition(rng):
    k = 6
    w, v = rng.normal(size=k - 1), rng.normal(size=k - 1)
    table = rng.normal(size=k)
    got = np.asarray(_kernels_py.lattice_sums(w, v, table, np.arange(k, dtype=np.int64)))
    want = [sum(w[l - 1] * table[(m * l) % k] + v[l - 1] for l in range(1, k)) for m in range(k)]
    assert np.allclose(got, want, atol=1e-14)


def test_pure_series_definition():
    x = np.array([0.5, 2.0])
    got = np.asarray(_kernels_py.sin_series(x, 2, np.array([50, 50], dtype=np.int64)))
    want = [sum(np.sin(l * xx) / l**2 for l in range(1, 51)) for xx in x]
    assert np.allclose(got, want, atol=1e-15)
