"""Quality criteria of a radial PTF profile: cutoff, zero crossings, mean response.

``amp_eps`` is always relative to the profile's own peak magnitude, so the
scores do not depend on the overall normalization of the profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import OpticsConfig
from .errors import NumericalError, ValidationError
from .source import DEFAULT_SAMPLES_PER_RING, RingPattern
from .transfer import RadialProfile, pattern_ptf, radial_profile

DEFAULT_AMP_EPS = 1e-3
WEIGHTINGS = ("uniform", "area")

CSV_HEADER = "mask,bit_depth,cutoff,crossings,mean_abs"


@dataclass(frozen=True)
class CriteriaReport:
    pattern_mask: int
    bit_depth: int
    cutoff: float
    zero_crossings: int
    mean_abs: float

    def csv_row(self) -> str:
        return (f"{self.pattern_mask},{self.bit_depth},{self.cutoff!r},"
                f"{self.zero_crossings},{self.mean_abs!r}")


def _check_eps(amp_eps: float) -> float:
    if not amp_eps > 0:
        raise ValidationError(f"amp_eps must be positive, got {amp_eps!r}")
    return float(amp_eps)


def _threshold(values: np.ndarray, amp_eps: float) -> float:
    return _check_eps(amp_eps) * float(np.max(np.abs(values))) if len(values) else 0.0


def cutoff_index(values, amp_eps: float = DEFAULT_AMP_EPS) -> int:
    """Index of the last bin (excluding DC) whose magnitude exceeds the threshold."""
    values = np.asarray(values, dtype=np.float64)
    eps = _threshold(values, amp_eps)
    above = np.nonzero(np.abs(values[1:]) > eps)[0]
    return int(above[-1] + 1) if len(above) else 0


def cutoff_frequency(profile: RadialProfile, amp_eps: float = DEFAULT_AMP_EPS) -> float:
    return float(profile.radii[cutoff_index(profile.values, amp_eps)])


def count_zero_crossings(profile: RadialProfile, amp_eps: float = DEFAULT_AMP_EPS) -> int:
    """Sign changes between consecutive above-threshold samples in ``(0, cutoff]``.

    Sub-threshold samples are skipped, so a tangential touch of zero or numerical
    noise around it does not count. The zero at DC is never counted.
    """
    values = np.asarray(profile.values, dtype=np.float64)
    c = cutoff_index(values, amp_eps)
    eps = _threshold(values, amp_eps)
    band = values[1 : c + 1]
    signs = np.sign(band[np.abs(band) > eps])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def mean_abs_response(profile: RadialProfile, amp_eps: float = DEFAULT_AMP_EPS,
                      weighting: str = "uniform") -> float:
    """Mean of ``|profile|`` over the pattern's own passband ``(0, cutoff]``.

    ``weighting="area"`` weights each bin by its radius instead of uniformly.
    """
    if weighting not in WEIGHTINGS:
        raise ValidationError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    c = cutoff_index(profile.values, amp_eps)
    if c == 0:
        raise NumericalError("mean response undefined: profile has zero cutoff (no response)")
    mag = np.abs(np.asarray(profile.values[1 : c + 1], dtype=np.float64))
    if weighting == "uniform":
        return float(mag.mean())
    w = np.asarray(profile.radii[1 : c + 1], dtype=np.float64)
    return float((mag * w).sum() / w.sum())


def score_profile(profile: RadialProfile, mask: int = 0, bit_depth: int = 0,
                  amp_eps: float = DEFAULT_AMP_EPS, weighting: str = "uniform") -> CriteriaReport:
    return CriteriaReport(
        pattern_mask=mask,
        bit_depth=bit_depth,
        cutoff=cutoff_frequency(profile, amp_eps),
        zero_crossings=count_zero_crossings(profile, amp_eps),
        mean_abs=mean_abs_response(profile, amp_eps, weighting),
    )


def evaluate(pattern: RingPattern, config: OpticsConfig,
             samples_per_ring: int = DEFAULT_SAMPLES_PER_RING,
             amp_eps: float = DEFAULT_AMP_EPS, weighting: str = "uniform") -> CriteriaReport:
    profile = radial_profile(pattern_ptf(pattern, config, samples_per_ring))
    return score_profile(profile, pattern.mask, pattern.bit_depth, amp_eps, weighting)
