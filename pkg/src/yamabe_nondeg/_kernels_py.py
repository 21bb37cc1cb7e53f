"""Pure-Python kernels, used when the compiled extension is unavailable.

Same signatures and summation order as ``_kernels``; accumulation uses
``math.fsum`` (correctly rounded), so values can differ from the compiled
path in the last bit but never in the reported digits.
"""

import math

import numpy as np

# Bound memory when a single point needs millions of terms.
_CHUNK = 1 << 20


def _series(x, order, nterms, term):
    x = np.asarray(x, dtype=np.float64)
    nterms = np.asarray(nterms, dtype=np.int64)
    out = np.empty(x.shape[0], dtype=np.float64)
    for j in range(x.shape[0]):
        parts = []
        for start in range(1, int(nterms[j]) + 1, _CHUNK):
            stop = min(start + _CHUNK, int(nterms[j]) + 1)
            l = np.arange(start, stop, dtype=np.float64)
            parts.append(term(l, x[j]) / l**order)
        out[j] = math.fsum(np.concatenate(parts).tolist()) if parts else 0.0
    return out


def cos_series(x, order, nterms):
    return _series(x, order, nterms, lambda l, xj: np.cos(l * xj))


def sin_series(x, order, nterms):
    return _series(x, order, nterms, lambda l, xj: np.sin(l * xj))


def versin_series(x, order, nterms):
    return _series(x, order, nterms, lambda l, xj: 2.0 * np.sin(l * (0.5 * xj)) ** 2)


def lattice_sums(w, v, table, modes):
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    table = np.asarray(table, dtype=np.float64)
    k = table.shape[0]
    l = np.arange(1, k, dtype=np.int64)
    out = np.empty(len(modes), dtype=np.float64)
    for i, m in enumerate(modes):
        out[i] = math.fsum((w * table[(int(m) % k * l) % k] + v).tolist())
    return out
