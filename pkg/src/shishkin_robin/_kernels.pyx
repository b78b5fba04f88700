# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tridiagonal kernels."""

import numpy as np

from .errors import NumericError


cdef Py_ssize_t _thomas(const double[::1] lower, const double[::1] diag,
                        const double[::1] upper, const double[::1] rhs,
                        double[::1] cp, double[::1] x) noexcept nogil:
    # Returns -1 on success, otherwise the row of the zero pivot.
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double pivot

    pivot = diag[0]
    if pivot == 0.0:
        return 0
    if n > 1:
        cp[0] = upper[0] / pivot
    x[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i - 1] * cp[i - 1]
        if pivot == 0.0:
            return i
        if i < n - 1:
            cp[i] = upper[i] / pivot
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return -1


def thomas_solve(lower, diag, upper, rhs):
    cdef const double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t bad

    if n == 0:
        raise ValueError("empty system")
    if lo.shape[0] != n - 1 or up.shape[0] != n - 1 or b.shape[0] != n:
        raise ValueError("inconsistent tridiagonal band lengths")
    out = np.empty(n, dtype=np.float64)
    cp = np.empty(max(n - 1, 1), dtype=np.float64)
    cdef double[::1] x = out
    cdef double[::1] c = cp
    with nogil:
        bad = _thomas(lo, d, up, b, c, x)
    if bad >= 0:
        raise NumericError(f"zero pivot in row {bad}")
    return out
