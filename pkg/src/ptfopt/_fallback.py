"""Pure numpy implementations of the compiled kernels in ``_ptf_kernel.pyx`` and ``_scan_kernel.pyx``."""

import numpy as np


def accumulate_points(out, axis, points, na, kz, pupil_radius, num_threads=1):
    n = axis.shape[0]
    du = axis[1] - axis[0]
    a0 = axis[0]
    r2max = pupil_radius * pupil_radius
    na2 = na * na
    for px, py in np.asarray(points, dtype=np.float64):
        offset = np.sqrt(1.0 - na2 * (px * px + py * py))
        i0 = max(int(np.floor((py - pupil_radius - a0) / du)) - 1, 0)
        i1 = min(int(np.ceil((py + pupil_radius - a0) / du)) + 1, n - 1)
        j0 = max(int(np.floor((px - pupil_radius - a0) / du)) - 1, 0)
        j1 = min(int(np.ceil((px + pupil_radius - a0) / du)) + 1, n - 1)
        dy = (axis[i0 : i1 + 1] - py)[:, None]
        dx = (axis[j0 : j1 + 1] - px)[None, :]
        r2 = dx * dx + dy * dy
        inside = r2 <= r2max
        block = out[i0 : i1 + 1, j0 : j1 + 1]
        block[inside] += np.sin(kz * (np.sqrt(1.0 - na2 * r2[inside]) - offset))


def _score_block(prof, weights, amp_eps):
    """Vectorized criteria for a block of profiles, shape ``(masks, bins)``."""
    nm, nb = prof.shape
    mag = np.abs(prof)
    eps = amp_eps * mag.max(axis=1)
    above = mag > eps[:, None]
    above[:, 0] = False
    any_above = above.any(axis=1)
    cutoff = np.where(any_above, nb - 1 - np.argmax(above[:, ::-1], axis=1), 0)

    idx = np.arange(nb)
    in_band = (idx[None, :] >= 1) & (idx[None, :] <= cutoff[:, None])
    sig = np.where(above & in_band, np.where(prof > 0.0, 1, -1), 0)
    # forward-fill the last above-threshold sign
    pos = np.where(sig != 0, idx[None, :], 0)
    np.maximum.accumulate(pos, axis=1, out=pos)
    filled = np.take_along_axis(sig, pos, axis=1)
    prev = np.zeros_like(filled)
    prev[:, 1:] = filled[:, :-1]
    crossings = ((sig != 0) & (prev != 0) & (sig != prev)).sum(axis=1)

    w = np.where(in_band, weights[None, :], 0.0)
    wsum = w.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(cutoff > 0, (mag * w).sum(axis=1) / wsum, np.nan)
    return cutoff.astype(np.int32), crossings.astype(np.int32), mean


def scan_masks(low_tab, low_cnt, high_tab, high_cnt, low_bits, start, stop,
               weights, amp_eps, cutoff_idx, crossings, mean_abs, num_threads=1,
               block=4096):
    lo_mask = (1 << low_bits) - 1
    for b0 in range(start, stop, block):
        b1 = min(b0 + block, stop)
        m = np.arange(b0, b1, dtype=np.int64)
        lo = m & lo_mask
        hi = m >> low_bits
        prof = (low_tab[lo] + high_tab[hi]) / (low_cnt[lo] + high_cnt[hi])[:, None]
        c, z, mu = _score_block(prof, weights, amp_eps)
        cutoff_idx[b0 - start : b1 - start] = c
        crossings[b0 - start : b1 - start] = z
        mean_abs[b0 - start : b1 - start] = mu
