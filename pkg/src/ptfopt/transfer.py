"""Weak-object phase transfer functions for ring-coded sources.

A single source point at normalized position ``p`` contributes the kernel

    |P(u - p)| * sin(k z (sqrt(1 - NA^2 |u - p|^2) - sqrt(1 - NA^2 |p|^2)))

on the normalized frequency grid; a pattern's PTF is the average over its
points. Per-ring sums are cached so any pattern is a weighted sum of at most
``bit_depth`` grids.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from .config import OpticsConfig
from .errors import NumericalError, ValidationError
from .source import DEFAULT_SAMPLES_PER_RING, RingPattern, discretize_pattern, ring_points

PUPIL_RADIUS = 1.0


def pupil(ux, uy, radius: float = PUPIL_RADIUS) -> np.ndarray:
    """Binary circular objective pupil; a sample is inside iff its center is."""
    ux = np.asarray(ux, dtype=np.float64)
    uy = np.asarray(uy, dtype=np.float64)
    return (ux * ux + uy * uy <= radius * radius).astype(np.float64)


@dataclass(frozen=True, eq=False)
class PTFGrid:
    """Sampled PTF over the normalized frequency grid of ``config``.

    ``point_count`` is the number of unit-intensity source points summed; when
    ``normalized`` is true the values were already divided by it.
    """

    values: np.ndarray
    config: OpticsConfig
    point_count: int
    normalized: bool
    pattern_mask: int = 0
    bit_depth: int = 0

    def normalize(self) -> "PTFGrid":
        if self.normalized:
            return self
        if self.point_count <= 0:
            raise NumericalError("cannot normalize a PTF built from zero source points")
        return PTFGrid(self.values / self.point_count, self.config, self.point_count, True,
                       self.pattern_mask, self.bit_depth)

    def negated(self) -> "PTFGrid":
        return PTFGrid(-self.values, self.config.with_defocus(-self.config.defocus),
                       self.point_count, self.normalized, self.pattern_mask, self.bit_depth)


def _check_kernel_domain(config: OpticsConfig) -> None:
    # sqrt(1 - NA^2 r^2) must stay real over the whole pupil
    if config.objective_na * PUPIL_RADIUS > 1.0:
        raise NumericalError(
            f"objective NA {config.objective_na} puts evanescent frequencies inside the pupil; "
            "the kernel is defined for NA <= 1 only"
        )


def points_ptf(points: np.ndarray, config: OpticsConfig) -> np.ndarray:
    """Unnormalized sum of point kernels, shape ``(grid_size, grid_size)``."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 2))
    _check_kernel_domain(config)
    radii = np.hypot(pts[:, 0], pts[:, 1]) if len(pts) else np.zeros(0)
    if np.any(radii > PUPIL_RADIUS + 1e-12):
        raise ValidationError(
            f"source point at radius {radii.max():.6g} lies outside the objective pupil"
        )
    n = config.grid_size
    out = np.zeros((n, n), dtype=np.float64)
    if config.defocus == 0.0 or len(pts) == 0:
        return out
    kz = config.wavenumber * config.defocus
    _backend.kernels.accumulate_points(
        out, config.freq_axis(), pts, config.objective_na, kz, PUPIL_RADIUS,
        _backend.thread_count(),
    )
    return out


def point_kernel(rho, config: OpticsConfig) -> PTFGrid:
    """Single-point kernel. The symmetric-pair PTF is the mean of ``rho`` and ``-rho``."""
    rho = np.asarray(rho, dtype=np.float64).reshape(2)
    return PTFGrid(points_ptf(rho[None, :], config), config, 1, False)


def symmetric_pair_ptf(rho, config: OpticsConfig) -> PTFGrid:
    rho = np.asarray(rho, dtype=np.float64).reshape(2)
    return PTFGrid(points_ptf(np.stack([rho, -rho]), config), config, 2, False).normalize()


class RingCache:
    """Per-ring unnormalized PTF grids, built once per key.

    Keys drop the defocus sign: the kernel is odd in ``z`` so the negative-defocus
    grid is the exact negation of the positive one.
    """

    def __init__(self):
        self._grids: dict[tuple, np.ndarray] = {}
        self._locks: dict[tuple, threading.Lock] = {}
        self._guard = threading.Lock()

    @staticmethod
    def _key(ring, bit_depth, samples, config):
        return (bit_depth, ring, samples, config.wavelength, config.objective_na,
                abs(config.defocus), config.grid_size, config.freq_extent)

    def ring(self, ring: int, bit_depth: int, samples: int, config: OpticsConfig) -> np.ndarray:
        key = self._key(ring, bit_depth, samples, config)
        grid = self._grids.get(key)
        if grid is None:
            with self._guard:
                lock = self._locks.setdefault(key, threading.Lock())
            with lock:
                grid = self._grids.get(key)
                if grid is None:
                    pts = ring_points(ring, bit_depth, samples)
                    grid = points_ptf(pts, config.with_defocus(abs(config.defocus)))
                    grid.setflags(write=False)
                    self._grids[key] = grid
        return -grid if config.defocus < 0 else grid

    def count(self, ring: int, bit_depth: int, samples: int) -> int:
        return len(ring_points(ring, bit_depth, samples))

    def clear(self) -> None:
        with self._guard:
            self._grids.clear()
            self._locks.clear()


RING_CACHE = RingCache()


def ring_ptf(ring_index: int, bit_depth: int, config: OpticsConfig,
             samples_per_ring: int = DEFAULT_SAMPLES_PER_RING) -> PTFGrid:
    if not (0 <= ring_index < bit_depth):
        raise ValidationError(f"ring index {ring_index} outside [0, {bit_depth})")
    grid = RING_CACHE.ring(ring_index, bit_depth, samples_per_ring, config)
    count = RING_CACHE.count(ring_index, bit_depth, samples_per_ring)
    return PTFGrid(grid, config, count, False, 1 << ring_index, bit_depth)


def pattern_ptf(pattern: RingPattern, config: OpticsConfig,
                samples_per_ring: int = DEFAULT_SAMPLES_PER_RING,
                normalized: bool = True) -> PTFGrid:
    """PTF of a pattern as the count-weighted sum of cached ring PTFs."""
    total = np.zeros((config.grid_size, config.grid_size))
    count = 0
    for ring in pattern.rings:
        total += RING_CACHE.ring(ring, pattern.bit_depth, samples_per_ring, config)
        count += RING_CACHE.count(ring, pattern.bit_depth, samples_per_ring)
    grid = PTFGrid(total, config, count, False, pattern.mask, pattern.bit_depth)
    return grid.normalize() if normalized else grid


def direct_pattern_ptf(pattern: RingPattern, config: OpticsConfig,
                       samples_per_ring: int = DEFAULT_SAMPLES_PER_RING,
                       normalized: bool = True) -> PTFGrid:
    """Reference path: one sum over every point of the pattern, no ring cache."""
    pts = discretize_pattern(pattern, samples_per_ring)
    grid = PTFGrid(points_ptf(pts.points, config), config, pts.total_count, False,
                   pattern.mask, pattern.bit_depth)
    return grid.normalize() if normalized else grid


@dataclass(frozen=True, eq=False)
class RadialProfile:
    radii: np.ndarray
    values: np.ndarray
    deviation: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.radii)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    def scaled(self, factor: float) -> "RadialProfile":
        dev = None if self.deviation is None else self.deviation * abs(factor)
        return RadialProfile(self.radii, self.values * factor, dev)


ISOTROPY_SUBBINS = 4


@lru_cache(maxsize=16)
def _radial_bins(grid_size: int, freq_extent: float):
    n = grid_size
    du = 2.0 * freq_extent / n
    ax = (np.arange(n) - n // 2) * du
    r = np.hypot(ax[None, :], ax[:, None])
    nbins = n // 2 + 1
    idx = np.rint(r / du).astype(np.int64)
    valid = idx < nbins
    counts = np.bincount(idx[valid], minlength=nbins)
    # sub-cell bins for the isotropy reference
    fine = np.rint(r[valid] / du * ISOTROPY_SUBBINS).astype(np.int64)
    fine_counts = np.bincount(fine)
    fine_used = fine_counts > 0
    fine_radius = np.bincount(fine, weights=r[valid])[fine_used] / fine_counts[fine_used]
    return idx, valid, counts, np.arange(nbins) * du, r, fine, fine_counts, fine_used, fine_radius


def radial_profile(grid, config: OpticsConfig | None = None) -> RadialProfile:
    """Azimuthal average over annular bins one grid cell wide.

    Bin ``b`` collects samples whose radius rounds to ``b`` cells, so bin 0 is the
    DC sample alone. ``deviation[b]`` is the largest departure of a sample in bin
    ``b`` from the azimuthal mean at its own radius. That mean is taken over
    quarter-cell radial bins and interpolated, so it follows radial structure
    finer than one cell (the sampling circles of a ring are closer than a cell)
    and the deviation isolates angular variation.
    """
    if isinstance(grid, PTFGrid):
        config = grid.config
        values = grid.values
    else:
        values = np.asarray(grid, dtype=np.float64)
    idx, valid, counts, radii, r, fine, fine_counts, fine_used, fine_radius = _radial_bins(
        config.grid_size, config.freq_extent)
    v = values[valid]
    prof = np.bincount(idx[valid], weights=v, minlength=len(radii)) / counts
    fine_mean = np.bincount(fine, weights=v)[fine_used] / fine_counts[fine_used]
    resid = np.abs(v - np.interp(r[valid], fine_radius, fine_mean))
    dev = np.zeros(len(radii))
    np.maximum.at(dev, idx[valid], resid)
    return RadialProfile(radii, prof, dev)


def ring_profiles(bit_depth: int, config: OpticsConfig,
                  samples_per_ring: int = DEFAULT_SAMPLES_PER_RING):
    """Unnormalized radial profiles and point counts of every ring.

    The azimuthal average is linear, so a pattern's profile is the sum of its
    rings' rows divided by the summed counts.
    """
    rows = np.empty((bit_depth, config.grid_size // 2 + 1))
    counts = np.empty(bit_depth)
    for ring in range(bit_depth):
        grid = RING_CACHE.ring(ring, bit_depth, samples_per_ring, config)
        rows[ring] = radial_profile(grid, config).values
        counts[ring] = RING_CACHE.count(ring, bit_depth, samples_per_ring)
    return rows, counts
