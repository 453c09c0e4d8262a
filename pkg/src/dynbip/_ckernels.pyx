# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. ``_pykernels`` holds the reference implementations."""

import numpy as np
from libc.math cimport exp
from libc.stdlib cimport qsort

ctypedef long long i64


cdef int _cmp_i64(const void *a, const void *b) noexcept nogil:
    cdef i64 x = (<const i64 *>a)[0]
    cdef i64 y = (<const i64 *>b)[0]
    return (x > y) - (x < y)


def bcc_values(const i64[::1] indptr, const i64[::1] indices,
               const i64[::1] indptr_o, const i64[::1] indices_o):
    """Per-node mean Jaccard similarity with second-order neighbours.

    Neighbourhoods are given as deduplicated CSR arrays: ``indptr/indices``
    for the scored side, ``indptr_o/indices_o`` for the opposite side.
    Second-order neighbours are summed in increasing index order.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_arr = np.zeros(n, dtype=np.float64)
    common_arr = np.zeros(n, dtype=np.int64)
    touched_arr = np.zeros(n, dtype=np.int64)
    cdef double[::1] out = out_arr
    cdef i64[::1] common = common_arr
    cdef i64[::1] touched = touched_arr
    cdef Py_ssize_t u, p, q, k, cnt
    cdef i64 y, w, du, dw, c
    cdef double s
    with nogil:
        for u in range(n):
            du = indptr[u + 1] - indptr[u]
            if du == 0:
                continue
            cnt = 0
            for p in range(indptr[u], indptr[u + 1]):
                y = indices[p]
                for q in range(indptr_o[y], indptr_o[y + 1]):
                    w = indices_o[q]
                    if w == u:
                        continue
                    if common[w] == 0:
                        touched[cnt] = w
                        cnt += 1
                    common[w] += 1
            if cnt == 0:
                continue
            qsort(&touched[0], cnt, sizeof(i64), _cmp_i64)
            s = 0.0
            for k in range(cnt):
                w = touched[k]
                c = common[w]
                dw = indptr[w + 1] - indptr[w]
                s += <double>c / <double>(du + dw - c)
                common[w] = 0
            out[u] = s / cnt
    return out_arr


def rbf_sum(const double[::1] x, const double[::1] wx,
            const double[::1] y, const double[::1] wy, double gamma):
    """``sum_ij wx_i wy_j exp(-gamma (x_i - y_j)^2)``."""
    cdef Py_ssize_t i, j, nx = x.shape[0], ny = y.shape[0]
    cdef double total = 0.0, row, d
    with nogil:
        for i in range(nx):
            row = 0.0
            for j in range(ny):
                d = x[i] - y[j]
                row += wy[j] * exp(-gamma * d * d)
            total += wx[i] * row
    return total
