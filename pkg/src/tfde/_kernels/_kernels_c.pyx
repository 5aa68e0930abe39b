# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-step hot kernels: history recurrence, weighted reduction,
tridiagonal elimination. Interface mirrors ``_kernels_py`` exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "math.h":
    double fabs(double x) nogil


def advance_history_inplace(
    double[:, ::1] values,
    const double[::1] decay,
    const double[::1] lam1,
    const double[::1] lam2,
    const double[::1] u_curr,
    const double[::1] u_prev,
):
    """values[i, j] <- decay[i]*values[i, j] + lam1[i]*u_curr[j] + lam2[i]*u_prev[j]."""
    cdef Py_ssize_t n_exp = values.shape[0]
    cdef Py_ssize_t width = values.shape[1]
    cdef Py_ssize_t i, j
    cdef double d, l1, l2
    for i in range(n_exp):
        d = decay[i]
        l1 = lam1[i]
        l2 = lam2[i]
        for j in range(width):
            values[i, j] = d * values[i, j] + l1 * u_curr[j] + l2 * u_prev[j]


def history_reduce(const double[::1] weights, const double[:, ::1] values):
    """Weighted column sums: out[j] = sum_i weights[i] * values[i, j]."""
    cdef Py_ssize_t n_exp = values.shape[0]
    cdef Py_ssize_t width = values.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(width, dtype=np.float64)
    cdef double[::1] acc = out
    cdef Py_ssize_t i, j
    cdef double w
    for i in range(n_exp):
        w = weights[i]
        for j in range(width):
            acc[j] += w * values[i, j]
    return out


def thomas_solve_core(
    const double[::1] sub,
    const double[::1] diag,
    const double[::1] sup,
    const double[::1] rhs,
):
    """Tridiagonal elimination; returns (solution, min |pivot| seen)."""
    cdef Py_ssize_t m = diag.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] c_prime = c_arr
    cdef double denom = diag[0]
    cdef double min_pivot = fabs(denom)
    cdef Py_ssize_t i
    c_prime[0] = sup[0] / denom if m > 1 else 0.0
    x[0] = rhs[0] / denom
    for i in range(1, m):
        denom = diag[i] - sub[i - 1] * c_prime[i - 1]
        if fabs(denom) < min_pivot:
            min_pivot = fabs(denom)
        if i < m - 1:
            c_prime[i] = sup[i] / denom
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / denom
    for i in range(m - 2, -1, -1):
        x[i] -= c_prime[i] * x[i + 1]
    return x_arr, min_pivot
