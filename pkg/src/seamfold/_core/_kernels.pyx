# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels.

Bit-identical to ``seamfold._core._kernels_py``; keep every floating-point
expression in the same evaluation order as the numpy reference (the build
disables FP contraction for the same reason).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor

cnp.import_array()


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b):
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b):
    return a if a < b else b


def fill_polygon(xs, ys, int width, int height, out=None):
    """OR a rasterized simple polygon into a uint8 mask of shape (H, W)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vx = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vy = np.ascontiguousarray(ys, dtype=np.float64)
    if out is None:
        out = np.zeros((height, width), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] mask = out
    cdef Py_ssize_t n = vx.shape[0]
    if n < 3:
        return out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xi_buf = np.empty(n, dtype=np.float64)
    cdef double y_min = vy[0], y_max = vy[0]
    cdef Py_ssize_t i, j, k, r, m, c0, c1
    cdef double yc, x1, y1, x2, y2, xi, key
    for i in range(1, n):
        if vy[i] < y_min:
            y_min = vy[i]
        if vy[i] > y_max:
            y_max = vy[i]
    cdef Py_ssize_t r_min = _imax(0, <Py_ssize_t>floor(y_min - 0.5))
    cdef Py_ssize_t r_max = _imin(height - 1, <Py_ssize_t>ceil(y_max))
    for r in range(r_min, r_max + 1):
        yc = r + 0.5
        m = 0
        for i in range(n):
            x1 = vx[i]
            y1 = vy[i]
            j = i + 1
            if j == n:
                j = 0
            x2 = vx[j]
            y2 = vy[j]
            if (y1 <= yc and yc < y2) or (y2 <= yc and yc < y1):
                xi_buf[m] = x1 + (yc - y1) * (x2 - x1) / (y2 - y1)
                m += 1
        if m == 0:
            continue
        # insertion sort: m is tiny (edge count of one ring)
        for i in range(1, m):
            key = xi_buf[i]
            j = i - 1
            while j >= 0 and xi_buf[j] > key:
                xi_buf[j + 1] = xi_buf[j]
                j -= 1
            xi_buf[j + 1] = key
        for k in range(0, m - 1, 2):
            c0 = _imax(0, <Py_ssize_t>ceil(xi_buf[k] - 0.5))
            c1 = _imin(width, <Py_ssize_t>ceil(xi_buf[k + 1] - 0.5))
            for i in range(c0, c1):
                mask[r, i] = 1
    return out


cdef int _point_in_ring_c(double xc, double yc,
                          const double[:, ::1] verts,
                          Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t i, j
    cdef double x1, y1, x2, y2, xi
    cdef int inside = 0
    for i in range(start, stop):
        x1 = verts[i, 0]
        y1 = verts[i, 1]
        j = i + 1
        if j == stop:
            j = start
        x2 = verts[j, 0]
        y2 = verts[j, 1]
        if (y1 <= yc and yc < y2) or (y2 <= yc and yc < y1):
            xi = x1 + (yc - y1) * (x2 - x1) / (y2 - y1)
            if xc < xi:
                inside = not inside
    return inside


def points_in_polygon(px, py, xs, ys):
    """Inside flags (uint8) for each query point against one ring."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qx = np.ascontiguousarray(px, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qy = np.ascontiguousarray(py, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vx = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vy = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t nq = qx.shape[0]
    cdef Py_ssize_t n = vx.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] res = np.zeros(nq, dtype=np.uint8)
    if n < 3:
        return res
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ring = np.empty((n, 2), dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        ring[i, 0] = vx[i]
        ring[i, 1] = vy[i]
    for i in range(nq):
        res[i] = _point_in_ring_c(qx[i], qy[i], ring, 0, n)
    return res


def uncovered_intervals(double ax, double ay, double bx, double by, verts, offsets):
    """Intervals of the segment A->B not covered by the union of rings."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cv = np.ascontiguousarray(verts, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] co = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n_rings = co.shape[0] - 1
    cdef Py_ssize_t total = cv.shape[0]
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double denom = dx * dx + dy * dy
    # worst case: every edge contributes one crossing
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ev_t = np.empty(total, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ev_r = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] inside = np.zeros(
        n_rings if n_rings > 0 else 1, dtype=np.uint8
    )
    cdef Py_ssize_t n_ev = 0
    cdef Py_ssize_t r, i, j, start, stop
    cdef double sp, sq, s, ix, iy, t, key
    cdef cnp.int64_t key_r
    cdef Py_ssize_t depth = 0
    for r in range(n_rings):
        start = co[r]
        stop = co[r + 1]
        if stop - start < 3:
            continue
        inside[r] = _point_in_ring_c(ax, ay, cv, start, stop)
        if inside[r]:
            depth += 1
        for i in range(start, stop):
            j = i + 1
            if j == stop:
                j = start
            sp = dx * (cv[i, 1] - ay) - dy * (cv[i, 0] - ax)
            sq = dx * (cv[j, 1] - ay) - dy * (cv[j, 0] - ax)
            if (sp <= 0 and 0 < sq) or (sq <= 0 and 0 < sp):
                s = sp / (sp - sq)
                ix = cv[i, 0] + s * (cv[j, 0] - cv[i, 0])
                iy = cv[i, 1] + s * (cv[j, 1] - cv[i, 1])
                t = ((ix - ax) * dx + (iy - ay) * dy) / denom
                if 0.0 <= t and t < 1.0:
                    ev_t[n_ev] = t
                    ev_r[n_ev] = r
                    n_ev += 1
    # insertion sort events by (t, ring) to match the reference ordering
    for i in range(1, n_ev):
        key = ev_t[i]
        key_r = ev_r[i]
        j = i - 1
        while j >= 0 and (ev_t[j] > key or (ev_t[j] == key and ev_r[j] > key_r)):
            ev_t[j + 1] = ev_t[j]
            ev_r[j + 1] = ev_r[j]
            j -= 1
        ev_t[j + 1] = key
        ev_r[j + 1] = key_r
    t0s = []
    t1s = []
    cdef double open_t = 0.0
    cdef int has_open = 1 if depth == 0 else 0
    for i in range(n_ev):
        r = ev_r[i]
        if inside[r]:
            depth -= 1
        else:
            depth += 1
        inside[r] = not inside[r]
        if depth == 0 and not has_open:
            open_t = ev_t[i]
            has_open = 1
        elif depth > 0 and has_open:
            if ev_t[i] > open_t:
                t0s.append(open_t)
                t1s.append(ev_t[i])
            has_open = 0
    if has_open and open_t < 1.0:
        t0s.append(open_t)
        t1s.append(1.0)
    return np.asarray(t0s, dtype=np.float64), np.asarray(t1s, dtype=np.float64)
