# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Frechet/DTW dynamic programs and SGM aggregation.

Must stay bit-compatible with _kernels_py: same arithmetic, same add
association (the build disables FP contraction).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "compiled"


cdef inline double dmin2(double a, double b) nogil:
    return a if a < b else b


cdef inline double dmax2(double a, double b) nogil:
    return a if a > b else b


def frechet_dp(a, b):
    """Discrete Frechet distance between point sequences a (n,2) and b (m,2)."""
    cdef double[:, ::1] pa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] pb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = pa.shape[0], m = pb.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, d, best
    ca_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] ca = ca_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                dx = pa[i, 0] - pb[j, 0]
                dy = pa[i, 1] - pb[j, 1]
                d = sqrt(dx * dx + dy * dy)
                if i == 0 and j == 0:
                    ca[0, 0] = d
                elif i == 0:
                    ca[0, j] = dmax2(ca[0, j - 1], d)
                elif j == 0:
                    ca[i, 0] = dmax2(ca[i - 1, 0], d)
                else:
                    best = dmin2(dmin2(ca[i - 1, j], ca[i - 1, j - 1]), ca[i, j - 1])
                    ca[i, j] = dmax2(d, best)
    return float(ca_arr[n - 1, m - 1])


def dtw_dp(a, b):
    """Dynamic time warping cost with squared-Euclidean local distances."""
    cdef double[:, ::1] pa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] pb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = pa.shape[0], m = pb.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, d, best
    acc_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] acc = acc_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                dx = pa[i, 0] - pb[j, 0]
                dy = pa[i, 1] - pb[j, 1]
                d = dx * dx + dy * dy
                if i == 0 and j == 0:
                    acc[0, 0] = d
                elif i == 0:
                    acc[0, j] = d + acc[0, j - 1]
                elif j == 0:
                    acc[i, 0] = d + acc[i - 1, 0]
                else:
                    best = dmin2(dmin2(acc[i - 1, j], acc[i - 1, j - 1]), acc[i, j - 1])
                    acc[i, j] = d + best
    return float(acc_arr[n - 1, m - 1])


def sgm_aggregate(cost, int dy, int dx, double p1, double p2):
    """Aggregate a stereo cost volume (H, W, D) along unit direction (dy, dx)."""
    cdef double[:, :, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t h = c.shape[0], w = c.shape[1], nd = c.shape[2]
    out_arr = np.empty((h, w, nd), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t y, x, d, py, px
    cdef Py_ssize_t y0, ystep, x0, xstep
    cdef double minprev, best, v

    y0 = 0 if dy >= 0 else h - 1
    ystep = 1 if dy >= 0 else -1
    x0 = 0 if dx >= 0 else w - 1
    xstep = 1 if dx >= 0 else -1

    with nogil:
        y = y0
        for _ in range(h):
            x = x0
            for _ in range(w):
                py = y - dy
                px = x - dx
                if py < 0 or py >= h or px < 0 or px >= w:
                    for d in range(nd):
                        out[y, x, d] = c[y, x, d]
                else:
                    minprev = out[py, px, 0]
                    for d in range(1, nd):
                        if out[py, px, d] < minprev:
                            minprev = out[py, px, d]
                    for d in range(nd):
                        best = dmin2(out[py, px, d], minprev + p2)
                        if d > 0:
                            best = dmin2(best, out[py, px, d - 1] + p1)
                        if d < nd - 1:
                            best = dmin2(best, out[py, px, d + 1] + p1)
                        out[y, x, d] = c[y, x, d] + best - minprev
                x += xstep
            y += ystep
    return out_arr
