"""Ring patterns on a square LED array.

LED ``(di, dj)`` (row and column offsets from the central LED) sits at the
normalized source position ``na_per_led * (dj, di)`` and belongs to ring
``round(sqrt(di^2 + dj^2))``. Only LEDs inside the objective pupil are used;
the others would give dark-field illumination, which the PTF model excludes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import OpticsConfig
from .errors import ValidationError
from .source import RingPattern
from .transfer import PUPIL_RADIUS, PTFGrid, points_ptf


@dataclass(frozen=True)
class LedArrayConfig:
    pitch: float = 1.25e-3
    used_extent: int = 15
    na_per_led: float | None = None

    def __post_init__(self):
        if self.used_extent < 1 or self.used_extent % 2 == 0:
            raise ValidationError("used_extent must be a positive odd integer (a central LED must exist)")
        if self.na_per_led is None:
            step = 1.0 / self.half_extent if self.half_extent else 1.0
            object.__setattr__(self, "na_per_led", step)
        if not self.na_per_led > 0:
            raise ValidationError("na_per_led must be positive")
        if self.na_per_led * self.half_extent > PUPIL_RADIUS + 1e-12:
            raise ValidationError("outermost on-axis LED falls outside the objective pupil (s > 1)")

    @property
    def half_extent(self) -> int:
        return (self.used_extent - 1) // 2

    @property
    def bit_depth(self) -> int:
        return self.half_extent + 1

    def offsets(self) -> tuple[np.ndarray, np.ndarray]:
        h = self.half_extent
        d = np.arange(-h, h + 1)
        dj, di = np.meshgrid(d, d)
        return di, dj


@dataclass(frozen=True, eq=False)
class LedMask:
    on: np.ndarray
    led_config: LedArrayConfig
    pattern_mask: int = 0

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.on))

    def points(self) -> np.ndarray:
        di, dj = self.led_config.offsets()
        step = self.led_config.na_per_led
        return np.column_stack((dj[self.on] * step, di[self.on] * step)).astype(np.float64)

    def to_ascii(self) -> str:
        return "\n".join(" ".join("1" if v else "0" for v in row) for row in self.on) + "\n"

    def to_json(self) -> str:
        cfg = self.led_config
        di, dj = cfg.offsets()
        leds = []
        h = cfg.half_extent
        for r, c in zip(*np.nonzero(self.on)):
            leds.append({
                "row": int(r), "col": int(c),
                "di": int(di[r, c]), "dj": int(dj[r, c]),
                "x_m": float(dj[r, c] * cfg.pitch), "y_m": float(di[r, c] * cfg.pitch),
                "rho": [float(dj[r, c] * cfg.na_per_led), float(di[r, c] * cfg.na_per_led)],
            })
        doc = {
            "used_extent": cfg.used_extent, "center": [h, h], "pitch_m": cfg.pitch,
            "na_per_led": cfg.na_per_led, "pattern_mask": self.pattern_mask, "leds": leds,
        }
        return json.dumps(doc, indent=2) + "\n"


def led_rings(led_cfg: LedArrayConfig) -> np.ndarray:
    di, dj = led_cfg.offsets()
    return np.rint(np.hypot(di, dj)).astype(np.int64)


def ring_to_led_mask(pattern: RingPattern, led_cfg: LedArrayConfig = LedArrayConfig()) -> LedMask:
    if pattern.bit_depth != led_cfg.bit_depth:
        raise ValidationError(
            f"a {led_cfg.used_extent}x{led_cfg.used_extent} array takes {led_cfg.bit_depth}-bit "
            f"patterns, got {pattern.bit_depth}-bit"
        )
    di, dj = led_cfg.offsets()
    rings = led_rings(led_cfg)
    active = np.zeros(rings.shape, dtype=bool)
    for ring in pattern.rings:
        active |= rings == ring
    inside = np.hypot(di, dj) * led_cfg.na_per_led <= PUPIL_RADIUS + 1e-12
    return LedMask(active & inside, led_cfg, pattern.mask)


def led_ptf(mask: LedMask, led_cfg: LedArrayConfig | None = None,
            config: OpticsConfig = OpticsConfig()) -> PTFGrid:
    """Normalized PTF of the lit LEDs, one coherent point source each."""
    if led_cfg is not None and led_cfg != mask.led_config:
        raise ValidationError("LED array config differs from the one the mask was built for")
    if mask.count == 0:
        raise ValidationError("LED mask has no LED switched on")
    grid = PTFGrid(points_ptf(mask.points(), config), config, mask.count, False,
                   mask.pattern_mask, mask.led_config.bit_depth)
    return grid.normalize()
