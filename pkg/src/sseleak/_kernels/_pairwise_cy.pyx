# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise-distance kernels (hot loop of the iterative recovery)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def pairwise_l2(double[:, ::1] a, double[:, ::1] b):
    """Euclidean distance between every row of ``a`` and every row of ``b``."""
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t k = a.shape[1]
    if b.shape[1] != k:
        raise ValueError("row length mismatch")
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, t
    cdef double acc, diff
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                diff = a[i, t] - b[j, t]
                acc += diff * diff
            out[i, j] = sqrt(acc)
    return out_arr


def pairwise_vf(double[::1] vol_a, double[::1] freq_a,
                double[::1] vol_b, double[::1] freq_b, double alpha):
    """Weighted L1 volume/frequency distance for every (row, column) pair."""
    cdef Py_ssize_t m = vol_a.shape[0]
    cdef Py_ssize_t n = vol_b.shape[0]
    cdef double beta = 1.0 - alpha
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(n):
            out[i, j] = alpha * fabs(vol_a[i] - vol_b[j]) + beta * fabs(freq_a[i] - freq_b[j])
    return out_arr
