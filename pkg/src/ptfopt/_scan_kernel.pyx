# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mask scan; mirrors ``_fallback.scan_masks``. Strict IEEE build."""

from cython.parallel cimport prange
from libc.math cimport fabs, NAN


def scan_masks(const double[:, ::1] low_tab, const double[::1] low_cnt,
               const double[:, ::1] high_tab, const double[::1] high_cnt,
               int low_bits, long long start, long long stop,
               const double[::1] weights, double amp_eps,
               int[::1] cutoff_idx, int[::1] crossings, double[::1] mean_abs,
               int num_threads=1):
    """Score masks ``start..stop-1`` from split partial-sum tables.

    The profile of mask ``m`` is ``(low_tab[m & lo] + high_tab[m >> low_bits])
    / (low_cnt[..] + high_cnt[..])``. Results go to ``[m - start]``.
    """
    cdef long long m, lo_mask = (1LL << low_bits) - 1
    cdef Py_ssize_t nb = low_tab.shape[1]
    cdef Py_ssize_t b, c, l, h, k
    cdef double cnt, v, peak, eps, wsum, s
    cdef int last, zc, sg

    for m in prange(start, stop, nogil=True, num_threads=num_threads, schedule="static"):
        l = m & lo_mask
        h = m >> low_bits
        k = m - start
        cnt = low_cnt[l] + high_cnt[h]
        peak = 0.0
        for b in range(nb):
            v = fabs((low_tab[l, b] + high_tab[h, b]) / cnt)
            if v > peak:
                peak = v
        eps = amp_eps * peak
        c = 0
        for b in range(nb - 1, 0, -1):
            if fabs((low_tab[l, b] + high_tab[h, b]) / cnt) > eps:
                c = b
                break
        cutoff_idx[k] = <int>c
        last = 0
        zc = 0
        s = 0.0
        wsum = 0.0
        for b in range(1, c + 1):
            v = (low_tab[l, b] + high_tab[h, b]) / cnt
            s = s + fabs(v) * weights[b]
            wsum = wsum + weights[b]
            if fabs(v) > eps:
                sg = 1 if v > 0.0 else -1
                if last != 0 and sg != last:
                    zc = zc + 1
                last = sg
        crossings[k] = zc
        if c > 0:
            mean_abs[k] = s / wsum
        else:
            mean_abs[k] = NAN
