# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled point-source PTF accumulation; mirrors ``_fallback.accumulate_points``.

Built with fast-math so gcc can call the vectorized libm ``sin``.
"""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport sqrt, sin, fabs, ceil, floor


def accumulate_points(double[:, ::1] out, const double[::1] axis,
                      const double[:, ::1] points, double na, double kz,
                      double pupil_radius, int num_threads=1):
    """Add the shifted-pupil kernel of every point into ``out`` in place.

    ``out[i, j] += sin(kz * (sqrt(1 - na^2 |u - p|^2) - sqrt(1 - na^2 |p|^2)))``
    wherever ``|u - p| <= pupil_radius``, with ``u = (axis[j], axis[i])``.
    """
    cdef Py_ssize_t n = axis.shape[0]
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t i, j, p, j0, j1
    cdef double du = axis[1] - axis[0]
    cdef double a0 = axis[0]
    cdef double r2max = pupil_radius * pupil_radius
    cdef double na2 = na * na
    cdef double uy, dy, dx, rem, half, px, r2, v, off
    cdef double[::1] offset = np.empty(npts, dtype=np.float64)

    for p in range(npts):
        px = points[p, 0]
        dy = points[p, 1]
        offset[p] = sqrt(1.0 - na2 * (px * px + dy * dy))

    # rows are independent; per-cell summation order is the point order
    for i in prange(n, nogil=True, num_threads=num_threads, schedule="static"):
        uy = axis[i]
        for p in range(npts):
            dy = uy - points[p, 1]
            rem = r2max - dy * dy
            if rem < 0.0:
                continue
            half = sqrt(rem)
            px = points[p, 0]
            j0 = <Py_ssize_t>floor((px - half - a0) / du) - 1
            j1 = <Py_ssize_t>ceil((px + half - a0) / du) + 1
            if j0 < 0:
                j0 = 0
            if j1 > n - 1:
                j1 = n - 1
            off = offset[p]
            # branch-free body so the compiler can vectorize sin/sqrt
            for j in range(j0, j1 + 1):
                dx = axis[j] - px
                r2 = dx * dx + dy * dy
                v = sin(kz * (sqrt(fabs(1.0 - na2 * r2)) - off))
                out[i, j] += v if r2 <= r2max else 0.0
