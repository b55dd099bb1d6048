# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the Givens reduction and transfer-probability grids.

Call-compatible with ``_pykernels``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, hypot, fabs

cnp.import_array()


cdef void _rotate_sim(double[:, ::1] a, Py_ssize_t p, Py_ssize_t q,
                      double c, double s) noexcept nogil:
    cdef Py_ssize_t k, n = a.shape[0]
    cdef double app = a[p, p], aqq = a[q, q], apq = a[p, q]
    cdef double xp, xq, np_, nq, cs
    for k in range(n):
        if k == p or k == q:
            continue
        xp = a[p, k]
        xq = a[q, k]
        np_ = c * xp + s * xq
        nq = -s * xp + c * xq
        a[p, k] = np_
        a[k, p] = np_
        a[q, k] = nq
        a[k, q] = nq
    cs = c * s
    a[p, p] = c * c * app + 2.0 * cs * apq + s * s * aqq
    a[q, q] = s * s * app - 2.0 * cs * apq + c * c * aqq
    a[p, q] = cs * (aqq - app) + (c * c - s * s) * apq
    a[q, p] = a[p, q]


cdef void _rotate_rows(double[:, ::1] m, Py_ssize_t p, Py_ssize_t q,
                       double c, double s) noexcept nogil:
    cdef Py_ssize_t k
    cdef double xp, xq
    for k in range(m.shape[1]):
        xp = m[p, k]
        xq = m[q, k]
        m[p, k] = c * xp + s * xq
        m[q, k] = -s * xp + c * xq


def rotate_similarity(cnp.ndarray a, Py_ssize_t p, Py_ssize_t q, double c, double s):
    if not (a.flags.c_contiguous and a.dtype == np.float64):
        raise TypeError("expected a C-contiguous float64 array")
    _rotate_sim(a, p, q, c, s)


def rotate_rows(cnp.ndarray m, Py_ssize_t p, Py_ssize_t q, double c, double s):
    if not (m.flags.c_contiguous and m.dtype == np.float64):
        raise TypeError("expected a C-contiguous float64 array")
    _rotate_rows(m, p, q, c, s)


def tridiagonalize(h, double tol):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.array(h, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = arr
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] qarr = np.eye(n)
    cdef double[:, ::1] Q = qarr
    # at most one rotation per sub-subdiagonal entry
    cdef Py_ssize_t cap = max(0, (n - 1) * (n - 2) // 2)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rarr = np.empty((cap, 4))
    cdef double[:, ::1] rots = rarr
    cdef Py_ssize_t j, i, p, m = 0
    cdef double b, r, c, s
    with nogil:
        for j in range(n - 2):
            p = j + 1
            i = n - 1
            while i > j + 1:
                b = a[i, j]
                if b != 0.0:
                    if fabs(b) <= tol:
                        a[i, j] = 0.0
                        a[j, i] = 0.0
                    else:
                        r = hypot(a[p, j], b)
                        c = a[p, j] / r
                        s = b / r
                        _rotate_sim(a, p, i, c, s)
                        a[i, j] = 0.0
                        a[j, i] = 0.0
                        a[p, j] = r
                        a[j, p] = r
                        _rotate_rows(Q, p, i, c, s)
                        rots[m, 0] = p
                        rots[m, 1] = i
                        rots[m, 2] = c
                        rots[m, 3] = s
                        m += 1
                i -= 1
    return arr, qarr, rarr[:m].copy()


def transfer_grid(lam, weight, times):
    cdef double[::1] l = np.ascontiguousarray(lam, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weight, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t nt = t.shape[0], nk = l.shape[0], a, k
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nt)
    cdef double[::1] o = out
    cdef double re, im, ph
    with nogil:
        for a in range(nt):
            re = 0.0
            im = 0.0
            for k in range(nk):
                ph = l[k] * t[a]
                re += w[k] * cos(ph)
                im += w[k] * sin(ph)
            o[a] = re * re + im * im
    return out
