"""Enumerate ring patterns and apply the three-stage filter cascade.

Stage 1 keeps patterns whose cutoff reaches the largest attainable value
``1 + (N-1)/N`` (minus one radial bin for grid discretization), stage 2 keeps
those without zero crossings, stage 3 ranks by mean absolute response with the
smaller mask winning ties.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .config import OpticsConfig
from .criteria import (
    DEFAULT_AMP_EPS,
    WEIGHTINGS,
    CriteriaReport,
    cutoff_index,
    score_profile,
)
from .errors import NumericalError, ValidationError
from .source import DEFAULT_SAMPLES_PER_RING, RingPattern
from .transfer import RadialProfile, ring_profiles

log = logging.getLogger(__name__)

MAX_EXHAUSTIVE_BITS = 20
MAX_PRUNED_BITS = 64


def stage1_threshold(bit_depth: int, config: OpticsConfig) -> float:
    return 1.0 + (bit_depth - 1) / bit_depth - config.freq_step


def _bin_weights(radii: np.ndarray, weighting: str) -> np.ndarray:
    if weighting not in WEIGHTINGS:
        raise ValidationError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    return np.ones_like(radii) if weighting == "uniform" else radii.copy()


def _rank(masks: np.ndarray, mean_abs: np.ndarray) -> np.ndarray:
    order = np.lexsort((masks, -mean_abs))
    return masks[order]


@dataclass(eq=False)
class SearchResult:
    """Scores of every pattern plus the survivors of each stage.

    Per-pattern scores are kept as arrays indexed by ``mask - 1``; use
    :meth:`report` or :attr:`reports` for :class:`CriteriaReport` objects.
    """

    bit_depth: int
    cutoff: np.ndarray
    crossings: np.ndarray
    mean_abs: np.ndarray
    threshold: float
    survivors_stage1: np.ndarray
    survivors_stage2: np.ndarray
    ranked: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def masks(self) -> np.ndarray:
        return np.arange(1, len(self.cutoff) + 1, dtype=np.int64)

    @property
    def optimal(self) -> int:
        if not len(self.ranked):
            raise NumericalError("no pattern survived the filter cascade")
        return int(self.ranked[0])

    def report(self, mask: int) -> CriteriaReport:
        i = int(mask) - 1
        return CriteriaReport(int(mask), self.bit_depth, float(self.cutoff[i]),
                              int(self.crossings[i]), float(self.mean_abs[i]))

    @property
    def reports(self) -> list[CriteriaReport]:
        return [self.report(m) for m in self.masks]

    def top(self, k: int = 3) -> list[CriteriaReport]:
        return [self.report(m) for m in self.ranked[:k]]


def _split_tables(rows: np.ndarray, counts: np.ndarray, bits: int):
    """Partial-sum tables over all subsets of ``bits`` consecutive rings."""
    size = 1 << bits
    tab = np.zeros((size, rows.shape[1]))
    cnt = np.zeros(size)
    for m in range(1, size):
        top = m.bit_length() - 1
        rest = m ^ (1 << top)
        tab[m] = tab[rest] + rows[top]
        cnt[m] = cnt[rest] + counts[top]
    return tab, cnt


def score_all_masks(rows: np.ndarray, counts: np.ndarray, weights: np.ndarray,
                    amp_eps: float = DEFAULT_AMP_EPS, kernels=None):
    """Cutoff index, crossings and mean response for masks ``1 .. 2^N - 1``.

    ``rows`` are unnormalized per-ring radial profiles; a mask's profile is the
    sum of its rows over the summed point counts, assembled from two half-width
    partial-sum tables so each mask costs O(bins).
    """
    kernels = kernels or _backend.kernels
    n = rows.shape[0]
    low_bits = n // 2
    low_tab, low_cnt = _split_tables(rows, counts, low_bits)
    high_tab, high_cnt = _split_tables(rows[low_bits:], counts[low_bits:], n - low_bits)
    total = (1 << n) - 1
    cut = np.zeros(total, dtype=np.int32)
    zc = np.zeros(total, dtype=np.int32)
    mean = np.zeros(total, dtype=np.float64)
    kernels.scan_masks(low_tab, low_cnt, high_tab, high_cnt, low_bits, 1, total + 1,
                       np.ascontiguousarray(weights, dtype=np.float64), float(amp_eps),
                       cut, zc, mean, _backend.thread_count())
    return cut, zc, mean


def exhaustive_scan(bit_depth: int, config: OpticsConfig,
                    samples_per_ring: int = DEFAULT_SAMPLES_PER_RING,
                    amp_eps: float = DEFAULT_AMP_EPS, weighting: str = "uniform",
                    kernels=None) -> SearchResult:
    if not (2 <= bit_depth <= MAX_EXHAUSTIVE_BITS):
        raise ValidationError(
            f"exhaustive scan supports 2 <= bit_depth <= {MAX_EXHAUSTIVE_BITS}, got {bit_depth}"
        )
    if not amp_eps > 0:
        raise ValidationError(f"amp_eps must be positive, got {amp_eps!r}")
    rows, counts = ring_profiles(bit_depth, config, samples_per_ring)
    radii = np.arange(rows.shape[1]) * config.freq_step
    weights = _bin_weights(radii, weighting)
    cut_idx, zc, mean = score_all_masks(rows, counts, weights, amp_eps, kernels)
    if np.any(cut_idx == 0):
        bad = int(np.argmax(cut_idx == 0)) + 1
        raise NumericalError(f"pattern {bad} has no PTF response (is the defocus zero?)")
    cutoff = radii[cut_idx]
    masks = np.arange(1, len(cut_idx) + 1, dtype=np.int64)
    thr = stage1_threshold(bit_depth, config)
    s1 = cutoff >= thr - 1e-12
    s2 = s1 & (zc == 0)
    return SearchResult(
        bit_depth=bit_depth,
        cutoff=cutoff,
        crossings=zc,
        mean_abs=mean,
        threshold=thr,
        survivors_stage1=masks[s1],
        survivors_stage2=masks[s2],
        ranked=_rank(masks[s2], mean[s2]),
        params=dict(samples_per_ring=samples_per_ring, amp_eps=amp_eps, weighting=weighting),
    )


@dataclass(frozen=True, eq=False)
class ComparedPattern:
    report: CriteriaReport
    profile: RadialProfile


def compare_patterns(masks, bit_depth: int, config: OpticsConfig,
                     samples_per_ring: int = DEFAULT_SAMPLES_PER_RING,
                     amp_eps: float = DEFAULT_AMP_EPS,
                     weighting: str = "uniform") -> list[ComparedPattern]:
    patterns = [RingPattern(bit_depth, int(m)) for m in masks]
    rows, counts = ring_profiles(bit_depth, config, samples_per_ring)
    radii = np.arange(rows.shape[1]) * config.freq_step
    out = []
    for pat in patterns:
        idx = list(pat.rings)
        profile = RadialProfile(radii, rows[idx].sum(axis=0) / counts[idx].sum())
        out.append(ComparedPattern(score_profile(profile, pat.mask, bit_depth, amp_eps, weighting), profile))
    return out


@dataclass(eq=False)
class PrunedSearchResult:
    """Outcome of :func:`pruned_scan`: the exact top-``k`` ranking only."""

    bit_depth: int
    ranked: list[CriteriaReport]
    nodes_visited: int
    evaluated: int
    threshold: float
    params: dict = field(default_factory=dict)

    @property
    def optimal(self) -> int:
        if not self.ranked:
            raise NumericalError("no pattern survived the filter cascade")
        return self.ranked[0].pattern_mask


def pruned_scan(bit_depth: int, config: OpticsConfig,
                samples_per_ring: int = DEFAULT_SAMPLES_PER_RING,
                amp_eps: float = DEFAULT_AMP_EPS, weighting: str = "uniform",
                top_k: int = 1) -> PrunedSearchResult:
    """Exact top-``k`` of the cascade without enumerating all ``2^N - 1`` masks.

    Depth-first over rings from the outermost inwards. A stage-1 survivor has
    cutoff index at least ``c_min``, so its mean response is at most

        sum_b w_b |acc_b + sum_S rows_jb| / (W_S * sum_{b<=c_min} w_b)

    and the triangle inequality splits the numerator into the fixed part and
    per-ring terms. The best completion of that bound is a ratio maximization
    solved greedily; subtrees whose bound falls below the current k-th best
    are skipped. Subtrees whose largest possible support cannot reach the
    stage-1 threshold are skipped too. The returned ranking equals the head of
    :func:`exhaustive_scan`'s ranking.
    """
    if not (2 <= bit_depth <= MAX_PRUNED_BITS):
        raise ValidationError(f"pruned scan supports 2 <= bit_depth <= {MAX_PRUNED_BITS}, got {bit_depth}")
    if top_k < 1:
        raise ValidationError("top_k must be >= 1")
    rows, counts = ring_profiles(bit_depth, config, samples_per_ring)
    nb = rows.shape[1]
    radii = np.arange(nb) * config.freq_step
    weights = _bin_weights(radii, weighting)
    thr = stage1_threshold(bit_depth, config)
    c_min = int(np.argmax(radii >= thr - 1e-12))
    if radii[c_min] < thr - 1e-12:
        raise NumericalError("stage-1 threshold lies beyond the frequency grid")
    denom = weights[1 : c_min + 1].sum()
    ring_mass = (np.abs(rows[:, 1:]) * weights[1:]).sum(axis=1)
    ratio = ring_mass / counts
    order = np.argsort(-ratio, kind="stable")

    best: list[tuple[float, int, CriteriaReport]] = []  # (-mean, mask, report), sorted
    stats = {"nodes": 0, "evaluated": 0}

    def kth_best():
        return -best[top_k - 1][0] if len(best) >= top_k else -np.inf

    def consider(mask, acc, weight):
        stats["evaluated"] += 1
        profile = RadialProfile(radii, acc / weight)
        c = cutoff_index(profile.values, amp_eps)
        if c == 0 or radii[c] < thr - 1e-12:
            return
        rep = score_profile(profile, mask, bit_depth, amp_eps, weighting)
        if rep.zero_crossings != 0:
            return
        entry = (-rep.mean_abs, mask, rep)
        best.append(entry)
        best.sort(key=lambda e: (e[0], e[1]))
        del best[top_k:]

    def bound(acc, weight, next_bit):
        num = float((np.abs(acc[1:]) * weights[1:]).sum())
        w = weight
        for j in order:
            if j >= next_bit:
                continue
            if w > 0 and ratio[j] <= num / w:
                break
            num += ring_mass[j]
            w += counts[j]
        return num / (w * denom) if w > 0 else np.inf

    def visit(next_bit, mask, acc, weight):
        # decide ring next_bit - 1 .. 0; ``mask`` already evaluated by the caller
        stats["nodes"] += 1
        if next_bit == 0:
            return
        top_possible = max(mask.bit_length(), next_bit)
        if 1.0 + top_possible / bit_depth < thr - 1e-12:
            return
        limit = kth_best()
        if np.isfinite(limit) and bound(acc, weight, next_bit) * (1 + 1e-9) < limit:
            return
        j = next_bit - 1
        inc_mask = mask | (1 << j)
        inc_acc = acc + rows[j]
        inc_w = weight + counts[j]
        consider(inc_mask, inc_acc, inc_w)
        visit(j, inc_mask, inc_acc, inc_w)
        visit(j, mask, acc, weight)

    visit(bit_depth, 0, np.zeros(nb), 0.0)
    log.debug("pruned scan N=%d: %d nodes, %d evaluations", bit_depth, stats["nodes"], stats["evaluated"])
    return PrunedSearchResult(
        bit_depth=bit_depth,
        ranked=[e[2] for e in best],
        nodes_visited=stats["nodes"],
        evaluated=stats["evaluated"],
        threshold=thr,
        params=dict(samples_per_ring=samples_per_ring, amp_eps=amp_eps, weighting=weighting),
    )
