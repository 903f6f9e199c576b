# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY, NAN

cnp.import_array()


def clip_rows(diffs, taus):
    cdef const double[:, ::1] D = np.ascontiguousarray(diffs, dtype=np.float64)
    cdef const double[::1] tau = np.ascontiguousarray(taus, dtype=np.float64)
    cdef Py_ssize_t m = D.shape[0], d = D.shape[1], e, k
    out_arr = np.empty((m, d))
    norms_arr = np.empty(m)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] norms = norms_arr
    cdef double s, scale
    for e in range(m):
        s = 0.0
        for k in range(d):
            s += D[e, k] * D[e, k]
        s = sqrt(s)
        norms[e] = s
        scale = 1.0
        if s > tau[e]:
            scale = tau[e] / s
        for k in range(d):
            out[e, k] = D[e, k] * scale
    return out_arr, norms_arr


def scatter_add(double[:, ::1] out, index, rows, double scale):
    cdef const cnp.intp_t[::1] idx = np.ascontiguousarray(index, dtype=np.intp)
    cdef Py_ssize_t m = idx.shape[0]
    if m == 0:
        return
    cdef const double[:, ::1] R = np.ascontiguousarray(rows, dtype=np.float64)
    cdef Py_ssize_t d = R.shape[1], e, k, i
    for e in range(m):
        i = idx[e]
        for k in range(d):
            out[i, k] += scale * R[e, k]


cdef void _rank_desc(const double[::1] v, Py_ssize_t lo, Py_ssize_t hi, cnp.intp_t[::1] order):
    # insertion sort of positions lo..hi-1 by (value desc, position asc)
    cdef Py_ssize_t n = hi - lo, a, b
    cdef cnp.intp_t cur
    for a in range(n):
        order[a] = lo + a
    for a in range(1, n):
        cur = order[a]
        b = a - 1
        while b >= 0 and v[order[b]] < v[cur]:
            order[b + 1] = order[b]
            b -= 1
        order[b + 1] = cur


def segment_kth_largest(values, indptr, Py_ssize_t k):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const cnp.intp_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.intp)
    cdef Py_ssize_t nseg = ptr.shape[0] - 1, s, lo, hi
    out_arr = np.empty(nseg)
    cdef double[::1] out = out_arr
    cdef cnp.intp_t[::1] order = np.empty(max(v.shape[0], 1), dtype=np.intp)
    for s in range(nseg):
        lo = ptr[s]
        hi = ptr[s + 1]
        if k == 0:
            out[s] = INFINITY
        elif hi - lo < k:
            out[s] = NAN
        else:
            _rank_desc(v, lo, hi, order)
            out[s] = v[order[k - 1]]
    return out_arr


def segment_top_mask(values, indptr, Py_ssize_t k):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const cnp.intp_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.intp)
    cdef Py_ssize_t nseg = ptr.shape[0] - 1, s, lo, hi, a, top
    mask_arr = np.zeros(v.shape[0], dtype=bool)
    if k == 0:
        return mask_arr
    cdef cnp.uint8_t[::1] mask = mask_arr.view(np.uint8)
    cdef cnp.intp_t[::1] order = np.empty(max(v.shape[0], 1), dtype=np.intp)
    for s in range(nseg):
        lo = ptr[s]
        hi = ptr[s + 1]
        _rank_desc(v, lo, hi, order)
        top = min(k, hi - lo)
        for a in range(top):
            mask[order[a]] = 1
    return mask_arr


def gcr_interval_scan(norms_desc, double const_term, double rate, Py_ssize_t start):
    cdef const double[::1] n = np.ascontiguousarray(norms_desc, dtype=np.float64)
    cdef Py_ssize_t m = n.shape[0], k
    cdef double prefix = 0.0, hi, lo, bound
    for k in range(m + 1):
        if k > 0:
            prefix += n[k - 1]
        if k < start:
            continue
        hi = INFINITY if k == 0 else n[k - 1]
        lo = n[k] if k < m else 0.0
        if not lo < hi:
            continue
        if rate > 0.0:
            bound = (prefix - const_term) / rate
            if bound > lo or (bound == lo and k < m):
                return k, bound
        elif prefix >= const_term:
            return k, INFINITY
    return -1, 0.0
