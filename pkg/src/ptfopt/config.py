"""Physical and numerical parameters shared by every module.

All internal frequencies are normalized by the objective cutoff NA/lambda, so
the pupil edge sits at 1 and the incoherent limit at 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError

DEFAULT_WAVELENGTH = 530e-9
DEFAULT_NA = 0.75
DEFAULT_DEFOCUS = 0.5e-6
DEFAULT_GRID = 256
DEFAULT_EXTENT = 2.0

JSON_KEYS = ("wavelength_m", "objective_na", "defocus_m", "grid_size", "freq_extent")


@dataclass(frozen=True)
class OpticsConfig:
    """Validated optical configuration.

    Parameters
    ----------
    wavelength : float
        Illumination wavelength in meters.
    objective_na : float
        Objective numerical aperture; defines the normalized pupil radius 1.
    defocus : float
        Signed defocus distance in meters.
    grid_size : int
        Samples per side of the square frequency grid (even, >= 64).
    freq_extent : float
        Half-width of the normalized frequency grid (>= 2).
    """

    wavelength: float = DEFAULT_WAVELENGTH
    objective_na: float = DEFAULT_NA
    defocus: float = DEFAULT_DEFOCUS
    grid_size: int = DEFAULT_GRID
    freq_extent: float = DEFAULT_EXTENT

    def __post_init__(self):
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValidationError(f"wavelength must be positive, got {self.wavelength!r}")
        if not (0.0 < self.objective_na < 1.5):
            raise ValidationError(f"objective NA must lie in (0, 1.5), got {self.objective_na!r}")
        if not math.isfinite(self.defocus):
            raise ValidationError("defocus must be finite")
        if isinstance(self.grid_size, bool) or int(self.grid_size) != self.grid_size:
            raise ValidationError(f"grid_size must be an integer, got {self.grid_size!r}")
        if self.grid_size < 64 or self.grid_size % 2:
            raise ValidationError(f"grid_size must be even and >= 64, got {self.grid_size}")
        if not (self.freq_extent >= 2.0):
            raise ValidationError(
                f"freq_extent {self.freq_extent!r} < 2 would clip the incoherent passband"
            )
        object.__setattr__(self, "grid_size", int(self.grid_size))
        object.__setattr__(self, "freq_extent", float(self.freq_extent))

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def freq_step(self) -> float:
        """Normalized frequency spacing of the grid (one radial bin)."""
        return 2.0 * self.freq_extent / self.grid_size

    @property
    def pixel_pitch(self) -> float:
        """Real-space sampling (meters) whose FFT grid matches the frequency grid."""
        return self.wavelength / (2.0 * self.objective_na * self.freq_extent)

    def freq_axis(self) -> np.ndarray:
        """1D normalized frequency axis; index grid_size // 2 is exactly zero."""
        n = self.grid_size
        return (np.arange(n) - n // 2) * self.freq_step

    def freq_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        ax = self.freq_axis()
        ux, uy = np.meshgrid(ax, ax)
        return ux, uy

    def to_normalized(self, u_physical):
        """Physical spatial frequency (cycles/m) to normalized units."""
        return np.asarray(u_physical) * self.wavelength / self.objective_na

    def to_physical(self, u_norm):
        return np.asarray(u_norm) * self.objective_na / self.wavelength

    def with_defocus(self, defocus: float) -> "OpticsConfig":
        return replace(self, defocus=float(defocus))

    def to_dict(self) -> dict:
        return {
            "wavelength_m": self.wavelength,
            "objective_na": self.objective_na,
            "defocus_m": self.defocus,
            "grid_size": self.grid_size,
            "freq_extent": self.freq_extent,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OpticsConfig":
        unknown = set(data) - set(JSON_KEYS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        names = dict(zip(JSON_KEYS, ("wavelength", "objective_na", "defocus", "grid_size", "freq_extent")))
        for key, value in data.items():
            kwargs[names[key]] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ValidationError(str(exc)) from exc


def make_config(
    wavelength: float = DEFAULT_WAVELENGTH,
    objective_na: float = DEFAULT_NA,
    defocus: float = DEFAULT_DEFOCUS,
    grid_size: int = DEFAULT_GRID,
    freq_extent: float = DEFAULT_EXTENT,
) -> OpticsConfig:
    return OpticsConfig(
        wavelength=float(wavelength),
        objective_na=float(objective_na),
        defocus=float(defocus),
        grid_size=grid_size,
        freq_extent=float(freq_extent),
    )


def load_config(path) -> OpticsConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config file must contain a JSON object")
    return OpticsConfig.from_dict(data)
