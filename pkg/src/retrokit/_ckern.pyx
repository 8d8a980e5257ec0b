# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled row gather/scatter and segment-max kernels.

Loops run in ascending row order so accumulation matches the NumPy
fallback bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def gather_rows_f64(double[:, ::1] src, long[::1] idx):
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t d = src.shape[1]
    out_arr = np.empty((m, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, j, r
    for k in range(m):
        r = idx[k]
        for j in range(d):
            out[k, j] = src[r, j]
    return out_arr


def scatter_add_rows_f64(double[:, ::1] acc, long[::1] idx, double[:, ::1] vals):
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t d = acc.shape[1]
    cdef Py_ssize_t k, j, r
    for k in range(m):
        r = idx[k]
        for j in range(d):
            acc[r, j] += vals[k, j]


def segment_max_f64(double[:, ::1] x, long[::1] seg, Py_ssize_t n_seg):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    out_arr = np.full((n_seg, d), -np.inf, dtype=np.float64)
    arg_arr = np.full((n_seg, d), n, dtype=np.int64)
    cdef double[:, ::1] out = out_arr
    cdef long[:, ::1] arg = arg_arr
    cdef Py_ssize_t r, j, s
    for r in range(n):
        s = seg[r]
        for j in range(d):
            if x[r, j] > out[s, j]:
                out[s, j] = x[r, j]
                arg[s, j] = r
    return out_arr, arg_arr
