"""Weak-object defocus image formation and PTF-inversion phase retrieval.

Real-space images use the pixel pitch whose FFT grid coincides with the
normalized frequency grid of the config (``OpticsConfig.pixel_pitch``).
Spectra are returned in centered (fftshift) order to line up with PTF grids.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import OpticsConfig
from .errors import NumericalError, ValidationError
from .source import DEFAULT_SAMPLES_PER_RING, RingPattern
from .transfer import PTFGrid, pattern_ptf

WEAK_PHASE_WARN = 0.5  # rad
DEFAULT_BETA_REL = 1e-3
OBJECT_KINDS = ("bead", "resolution_bars", "smooth_random")


@dataclass(frozen=True, eq=False)
class PhaseField:
    values: np.ndarray
    pixel_pitch: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("phase values must be finite")


@dataclass(frozen=True, eq=False)
class WeakObject:
    phase: PhaseField
    mean_amplitude: float = 1.0
    amplitude_deviation: np.ndarray | None = None

    def __post_init__(self):
        if not self.mean_amplitude > 0:
            raise ValidationError("mean amplitude a0 must be positive")
        peak = float(np.max(np.abs(self.phase.values))) if self.phase.values.size else 0.0
        if peak > WEAK_PHASE_WARN:
            warnings.warn(
                f"peak phase {peak:.3g} rad exceeds {WEAK_PHASE_WARN} rad; "
                "the weak-object linearization is inaccurate here",
                stacklevel=3,
            )

    @property
    def is_pure_phase(self) -> bool:
        return self.amplitude_deviation is None or not np.any(self.amplitude_deviation)

    @property
    def background(self) -> float:
        return self.mean_amplitude ** 2


@dataclass(frozen=True, eq=False)
class IntensityStack:
    planes: list = field(default_factory=list)  # [(z, intensity)]
    background: float = 1.0

    def plane(self, z: float) -> np.ndarray:
        for zz, img in self.planes:
            if zz == z:
                return img
        raise ValidationError(f"no intensity plane at z = {z!r}")

    @property
    def defocus_values(self) -> list[float]:
        return [z for z, _ in self.planes]


def _hermitian(spec: np.ndarray) -> np.ndarray:
    """Conjugate-symmetric part of an FFT-ordered spectrum."""
    mirrored = np.roll(spec[::-1, ::-1], 1, axis=(0, 1))
    return 0.5 * (spec + np.conj(mirrored))


def _check_grid(values: np.ndarray, pitch: float, config: OpticsConfig) -> None:
    n = config.grid_size
    if values.shape != (n, n):
        raise ValidationError(f"phase grid shape {values.shape} does not match config grid {n}x{n}")
    if not np.isclose(pitch, config.pixel_pitch, rtol=1e-9, atol=0.0):
        raise ValidationError(
            f"pixel pitch {pitch:.6g} m does not match the config's {config.pixel_pitch:.6g} m"
        )


def forward_intensity(obj: WeakObject, pattern: RingPattern, z_list, config: OpticsConfig,
                      samples_per_ring: int = DEFAULT_SAMPLES_PER_RING) -> IntensityStack:
    """Defocused intensities ``B + F^-1[F[phi] * H_P(u; z)]`` for each ``z``."""
    if not obj.is_pure_phase:
        raise ValidationError("only pure-phase objects are supported (amplitude deviation must be zero)")
    phi = np.asarray(obj.phase.values, dtype=np.float64)
    _check_grid(phi, obj.phase.pixel_pitch, config)
    phase_spec = np.fft.fft2(phi)
    planes = []
    for z in z_list:
        z = float(z)
        h = pattern_ptf(pattern, config.with_defocus(z), samples_per_ring).values
        spec = _hermitian(phase_spec * np.fft.ifftshift(h))
        img = obj.background + np.real(np.fft.ifft2(spec))
        if np.any(img < 0):
            raise NumericalError(
                f"weak-object model gives negative intensity at z = {z:g}; reduce the phase amplitude"
            )
        planes.append((z, img))
    return IntensityStack(planes=planes, background=obj.background)


def symmetric_pair(stack: IntensityStack) -> float:
    """Smallest positive ``z`` for which both ``+z`` and ``-z`` planes exist."""
    zs = set(stack.defocus_values)
    pairs = sorted(z for z in zs if z > 0 and -z in zs)
    if not pairs:
        raise ValidationError("intensity stack lacks a symmetric +z/-z pair")
    return pairs[0]


def difference_spectrum(stack: IntensityStack, z: float | None = None) -> np.ndarray:
    """Centered spectrum of ``I(+z) - I(-z)``; equals ``2 F[phi] H_P(z)`` in the model."""
    if z is None:
        z = symmetric_pair(stack)
    diff = stack.plane(z) - stack.plane(-z)
    return np.fft.fftshift(np.fft.fft2(diff))


def default_beta(ptf: PTFGrid) -> float:
    return DEFAULT_BETA_REL * float(np.max(ptf.values ** 2))


def reconstruct_phase(diff_spectrum: np.ndarray, ptf: PTFGrid, beta: float | None = None) -> PhaseField:
    """Tikhonov inversion ``D H / (2 (H^2 + beta))`` with the mean phase set to zero."""
    if beta is None:
        beta = default_beta(ptf)
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta!r}")
    h = ptf.values
    if diff_spectrum.shape != h.shape:
        raise ValidationError("difference spectrum and PTF grids differ in shape")
    est = diff_spectrum * h / (2.0 * (h * h + beta))
    phi = np.real(np.fft.ifft2(np.fft.ifftshift(est)))
    phi -= phi.mean()
    return PhaseField(phi, ptf.config.pixel_pitch)


def passband_mask(ptf: PTFGrid, amp_eps: float = 1e-3) -> np.ndarray:
    """Centered boolean mask of frequencies where ``|H_P|`` exceeds ``amp_eps`` of its peak."""
    mag = np.abs(ptf.values)
    return mag > amp_eps * mag.max()


def passband_rmse(recovered, truth, passband: np.ndarray) -> float:
    """RMS of the phase error restricted to a centered frequency mask."""
    rec = recovered.values if isinstance(recovered, PhaseField) else np.asarray(recovered)
    tru = truth.values if isinstance(truth, PhaseField) else np.asarray(truth)
    err = np.fft.fftshift(np.fft.fft2(rec - tru)) * passband
    return float(np.sqrt(np.mean(np.abs(np.fft.ifft2(np.fft.ifftshift(err))) ** 2)))


def _real_axis(config: OpticsConfig) -> np.ndarray:
    n = config.grid_size
    return (np.arange(n) - n // 2) * config.pixel_pitch


def bead_phase(config: OpticsConfig, diameter=8e-6, n_object=1.59, n_medium=1.58, center=(0.0, 0.0)):
    """Projected phase of a sphere: ``k (n - n_m) * 2 sqrt(R^2 - r^2)``."""
    fov = config.grid_size * config.pixel_pitch
    if diameter > fov:
        raise ValidationError(f"bead diameter {diameter:g} m exceeds the field of view {fov:g} m")
    x = _real_axis(config)
    xx, yy = np.meshgrid(x - center[0], x - center[1])
    r2 = xx ** 2 + yy ** 2
    radius = diameter / 2
    thickness = 2.0 * np.sqrt(np.clip(radius ** 2 - r2, 0.0, None))
    return config.wavenumber * (n_object - n_medium) * thickness


def bars_phase(config: OpticsConfig, bar_width=0.274e-6, n_bars=3, height=200e-9,
               n_object=1.52, n_medium=1.0, bar_length=None, supersample=8):
    """Group of vertical phase bars (period ``2 * bar_width``), area-averaged per pixel."""
    if bar_length is None:
        bar_length = 5 * bar_width
    fov = config.grid_size * config.pixel_pitch
    group = (2 * n_bars - 1) * bar_width
    if max(group, bar_length) > fov:
        raise ValidationError("bar group larger than the field of view")
    n, s = config.grid_size, int(supersample)
    fine = (np.arange(n * s) - n * s // 2 + 0.5 - s / 2) * (config.pixel_pitch / s)
    left = -group / 2
    in_bar_x = np.zeros(fine.shape, dtype=bool)
    for b in range(n_bars):
        x0 = left + 2 * b * bar_width
        in_bar_x |= (fine >= x0) & (fine < x0 + bar_width)
    in_bar_y = np.abs(fine) < bar_length / 2
    cover_x = in_bar_x.reshape(n, s).mean(axis=1)
    cover_y = in_bar_y.reshape(n, s).mean(axis=1)
    fill = np.outer(cover_y, cover_x)
    return config.wavenumber * (n_object - n_medium) * height * fill


def smooth_random_phase(config: OpticsConfig, peak=0.2, band=0.8, seed=0):
    """Band-limited Gaussian random field with zero mean and ``max|phi| = peak``.

    White noise is low-passed with a raised-cosine window reaching zero at the
    normalized frequency ``band``; the DC term is removed.
    """
    if not 0 < band <= 2.0:
        raise ValidationError("band must lie in (0, 2]")
    rng = np.random.default_rng(seed)
    n = config.grid_size
    noise = rng.standard_normal((n, n))
    ux, uy = config.freq_mesh()
    u = np.hypot(ux, uy)
    window = np.where(u < band, 0.5 * (1.0 + np.cos(np.pi * u / band)), 0.0)
    window[n // 2, n // 2] = 0.0
    spec = np.fft.fft2(noise) * np.fft.ifftshift(window)
    field_ = np.real(np.fft.ifft2(spec))
    scale = np.max(np.abs(field_))
    if scale == 0:
        return field_
    return field_ * (peak / scale)


def make_test_object(kind: str, config: OpticsConfig, **params) -> WeakObject:
    makers = {"bead": bead_phase, "resolution_bars": bars_phase, "bars": bars_phase,
              "smooth_random": smooth_random_phase}
    if kind not in makers:
        raise ValidationError(f"unknown object kind {kind!r}; choose from {OBJECT_KINDS}")
    try:
        phi = makers[kind](config, **params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind}: {exc}") from exc
    return WeakObject(PhaseField(phi, config.pixel_pitch))
