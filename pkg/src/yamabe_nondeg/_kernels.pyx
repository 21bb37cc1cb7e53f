# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled summation kernels.

Every loop runs in ascending index order with Neumaier-compensated
accumulation, so results are bit-reproducible for a given input.
The pure-Python twin lives in ``_kernels_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, pow, fabs

cnp.import_array()

cdef inline void _acc(double term, double* s, double* c) noexcept nogil:
    cdef double t = s[0] + term
    if fabs(s[0]) >= fabs(term):
        c[0] += (s[0] - t) + term
    else:
        c[0] += (term - t) + s[0]
    s[0] = t


def cos_series(const double[:] x, int order, const long long[:] nterms):
    """sum_{l=1}^{L_j} cos(l x_j) / l**order for every j."""
    cdef Py_ssize_t j, npts = x.shape[0]
    cdef long long l
    cdef double s, c, xj, p = order
    out = np.empty(npts, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for j in range(npts):
            s = 0.0
            c = 0.0
            xj = x[j]
            for l in range(1, nterms[j] + 1):
                _acc(cos(l * xj) / pow(<double>l, p), &s, &c)
            o[j] = s + c
    return out


def sin_series(const double[:] x, int order, const long long[:] nterms):
    """sum_{l=1}^{L_j} sin(l x_j) / l**order for every j."""
    cdef Py_ssize_t j, npts = x.shape[0]
    cdef long long l
    cdef double s, c, xj, p = order
    out = np.empty(npts, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for j in range(npts):
            s = 0.0
            c = 0.0
            xj = x[j]
            for l in range(1, nterms[j] + 1):
                _acc(sin(l * xj) / pow(<double>l, p), &s, &c)
            o[j] = s + c
    return out


def versin_series(const double[:] x, int order, const long long[:] nterms):
    """sum_{l=1}^{L_j} 2 sin(l x_j / 2)**2 / l**order for every j."""
    cdef Py_ssize_t j, npts = x.shape[0]
    cdef long long l
    cdef double s, c, h, sn, p = order
    out = np.empty(npts, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for j in range(npts):
            s = 0.0
            c = 0.0
            h = 0.5 * x[j]
            for l in range(1, nterms[j] + 1):
                sn = sin(l * h)
                _acc(2.0 * sn * sn / pow(<double>l, p), &s, &c)
            o[j] = s + c
    return out


def lattice_sums(const double[:] w, const double[:] v, const double[:] table,
                 const long long[:] modes):
    """For each mode m: sum_{l=1}^{k-1} (w[l-1] * table[m l mod k] + v[l-1]).

    ``table`` holds phase(2 pi r / k) for r = 0 .. k-1, so the angle m theta_l
    is reduced exactly before lookup and cos(m theta_l) comes from the same
    values as cos(theta_l).
    """
    cdef Py_ssize_t i, nm = modes.shape[0]
    cdef long long k = table.shape[0]
    cdef long long l, m
    cdef double s, c
    out = np.empty(nm, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for i in range(nm):
            m = modes[i] % k
            s = 0.0
            c = 0.0
            for l in range(1, k):
                _acc(w[l - 1] * table[(m * l) % k] + v[l - 1], &s, &c)
            o[i] = s + c
    return out
