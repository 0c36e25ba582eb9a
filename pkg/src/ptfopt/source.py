"""Binary ring-coded illumination patterns and their point-source realization.

Ring ``i`` of an ``N``-bit pattern covers the normalized source radii
``[i/N, (i+1)/N)``; bit ``i`` of the mask switches it on (bit 0 is the
innermost disk).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

MAX_BIT_DEPTH = 64
DEFAULT_SAMPLES_PER_RING = 16


@dataclass(frozen=True)
class RingPattern:
    bit_depth: int
    mask: int

    def __post_init__(self):
        if not (1 <= self.bit_depth <= MAX_BIT_DEPTH):
            raise ValidationError(f"bit depth must lie in [1, {MAX_BIT_DEPTH}], got {self.bit_depth}")
        if self.mask == 0:
            raise ValidationError("empty pattern (mask 0 switches every ring off)")
        if not (1 <= self.mask < (1 << self.bit_depth)):
            raise ValidationError(
                f"pattern index {self.mask} out of range [1, {(1 << self.bit_depth) - 1}] "
                f"for {self.bit_depth}-bit patterns"
            )

    @property
    def rings(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.bit_depth) if (self.mask >> i) & 1)

    @property
    def outer_radius(self) -> float:
        """Largest active normalized source radius (the coherence parameter s)."""
        return (self.mask.bit_length()) / self.bit_depth

    def ring_bounds(self, ring: int) -> tuple[float, float]:
        return ring / self.bit_depth, (ring + 1) / self.bit_depth

    def binary(self) -> str:
        return format(self.mask, f"0{self.bit_depth}b")


def pattern_from_index(index: int, bit_depth: int) -> RingPattern:
    return RingPattern(bit_depth=int(bit_depth), mask=int(index))


_RING_RE = re.compile(r"^R(\d+)$", re.IGNORECASE)


def parse_pattern(text: str, bit_depth: int) -> RingPattern:
    """Parse a pattern given as decimal, ``0b`` binary literal or ring list.

    >>> parse_pattern("R7,R11", 12).mask
    2176
    >>> parse_pattern("0b100000000000", 12).mask
    2048
    """
    text = str(text).strip()
    if not text:
        raise ValidationError("empty pattern specification")
    if text[0] in "Rr":
        mask = 0
        for item in text.split(","):
            match = _RING_RE.match(item.strip())
            if not match:
                raise ValidationError(f"bad ring token {item!r} in {text!r}")
            ring = int(match.group(1))
            if ring >= bit_depth:
                raise ValidationError(f"ring R{ring} does not exist for {bit_depth}-bit patterns")
            mask |= 1 << ring
    else:
        try:
            mask = int(text, 0)
        except ValueError:
            raise ValidationError(f"cannot parse pattern {text!r}") from None
    return pattern_from_index(mask, bit_depth)


@dataclass(frozen=True)
class SourcePointSet:
    """Discrete unit-intensity point sources in normalized pupil coordinates."""

    points: np.ndarray
    ring_ids: np.ndarray

    @property
    def total_count(self) -> int:
        return int(self.points.shape[0])


def circle_radii(ring: int, bit_depth: int, samples_per_ring: int) -> np.ndarray:
    """Radii of the sampling circles of one ring (midpoints of equal sub-bands)."""
    j = np.arange(samples_per_ring)
    return (ring + (j + 0.5) / samples_per_ring) / bit_depth


@lru_cache(maxsize=512)
def _ring_points_cached(ring: int, bit_depth: int, samples_per_ring: int) -> np.ndarray:
    dr = 1.0 / (bit_depth * samples_per_ring)
    chunks = []
    for j, r in enumerate(circle_radii(ring, bit_depth, samples_per_ring)):
        # arc spacing <= radial spacing; an even count keeps the circle inversion symmetric
        count = max(2, math.ceil(2.0 * math.pi * r / dr - 1e-9))
        count += count % 2
        # alternate circles are staggered by half a step to break radial spokes
        theta = (np.arange(count) + 0.5 * (j % 2)) * (2.0 * math.pi / count)
        chunks.append(np.column_stack((r * np.cos(theta), r * np.sin(theta))))
    pts = np.vstack(chunks)
    pts.setflags(write=False)
    return pts


def ring_points(ring: int, bit_depth: int, samples_per_ring: int = DEFAULT_SAMPLES_PER_RING) -> np.ndarray:
    """Point sources realizing a single ring, shape ``(n, 2)``.

    The layout of a ring depends only on ``(ring, bit_depth, samples_per_ring)``,
    so a pattern's point set is the disjoint union of its rings' sets.
    """
    if samples_per_ring < 1:
        raise ValidationError("radial_samples_per_ring must be >= 1")
    if not (0 <= ring < bit_depth):
        raise ValidationError(f"ring index {ring} outside [0, {bit_depth})")
    return _ring_points_cached(int(ring), int(bit_depth), int(samples_per_ring))


def discretize_pattern(
    pattern: RingPattern, radial_samples_per_ring: int = DEFAULT_SAMPLES_PER_RING
) -> SourcePointSet:
    chunks, ids = [], []
    for ring in pattern.rings:
        pts = ring_points(ring, pattern.bit_depth, radial_samples_per_ring)
        chunks.append(pts)
        ids.append(np.full(len(pts), ring, dtype=np.int64))
    return SourcePointSet(points=np.vstack(chunks), ring_ids=np.concatenate(ids))
