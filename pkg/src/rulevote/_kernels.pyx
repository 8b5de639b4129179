# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels.

Signatures mirror :mod:`rulevote._kernels_py`; the two modules are
interchangeable and :mod:`rulevote.kernels` picks one at import.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def value_counts(const int[:, ::1] codes, const long[::1] rows,
                 const long[::1] offsets, long total):
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef Py_ssize_t n_attrs = codes.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(total, dtype=np.int64)
    cdef long[::1] counts = out
    cdef Py_ssize_t i, j
    cdef long r
    cdef int c
    with nogil:
        for i in range(n_rows):
            r = rows[i]
            for j in range(n_attrs):
                c = codes[r, j]
                if c >= 0:
                    counts[offsets[j] + c] += 1
    return out


def satisfied_counts(const int[:, ::1] codes, const long[::1] lit_attr,
                     const long[::1] lit_lo, const long[::1] lit_hi,
                     const unsigned char[::1] lit_neg, const long[::1] lit_rule,
                     long n_rules):
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t n_lits = lit_attr.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out = np.zeros((n, n_rules), dtype=np.int32)
    cdef int[:, ::1] sat = out
    cdef Py_ssize_t i, k
    cdef int c
    cdef bint hit
    with nogil:
        for i in range(n):
            for k in range(n_lits):
                c = codes[i, lit_attr[k]]
                if c < 0:
                    continue
                hit = lit_lo[k] <= c and c <= lit_hi[k]
                if hit != lit_neg[k]:
                    sat[i, lit_rule[k]] += 1
    return out


def gradient_histogram(const int[:, ::1] bins, const long[::1] rows,
                       const double[::1] grad, const double[::1] hess,
                       const long[::1] offsets, long total):
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef Py_ssize_t n_feat = bins.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_out = np.zeros(total, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h_out = np.zeros(total, dtype=np.float64)
    cdef double[::1] g = g_out
    cdef double[::1] h = h_out
    cdef Py_ssize_t i, j
    cdef long r, slot
    cdef double gr, hr
    with nogil:
        for i in range(n_rows):
            r = rows[i]
            gr = grad[r]
            hr = hess[r]
            for j in range(n_feat):
                slot = offsets[j] + bins[r, j]
                g[slot] += gr
                h[slot] += hr
    return g_out, h_out
