"""Ring-coded illumination design for defocus-based quantitative phase imaging.

Computes weak-object phase transfer functions (PTFs) of annular source
patterns, scores them by cutoff, zero crossings and mean response, searches
all ring patterns for the best one, and simulates/inverts defocused images.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .config import OpticsConfig, load_config, make_config
from .criteria import (
    CriteriaReport,
    count_zero_crossings,
    cutoff_frequency,
    evaluate,
    mean_abs_response,
    score_profile,
)
from .errors import NumericalError, PtfoptError, ValidationError
from .imaging import (
    IntensityStack,
    PhaseField,
    WeakObject,
    difference_spectrum,
    forward_intensity,
    make_test_object,
    passband_mask,
    passband_rmse,
    reconstruct_phase,
)
from .led import LedArrayConfig, LedMask, led_ptf, ring_to_led_mask
from .search import SearchResult, compare_patterns, exhaustive_scan, pruned_scan
from .source import RingPattern, SourcePointSet, discretize_pattern, parse_pattern, pattern_from_index
from .transfer import (
    PTFGrid,
    RadialProfile,
    direct_pattern_ptf,
    pattern_ptf,
    point_kernel,
    radial_profile,
    ring_ptf,
)

__all__ = [
    "BACKEND", "OpticsConfig", "load_config", "make_config",
    "CriteriaReport", "count_zero_crossings", "cutoff_frequency", "evaluate",
    "mean_abs_response", "score_profile",
    "NumericalError", "PtfoptError", "ValidationError",
    "IntensityStack", "PhaseField", "WeakObject", "difference_spectrum", "forward_intensity",
    "make_test_object", "passband_mask", "passband_rmse", "reconstruct_phase",
    "LedArrayConfig", "LedMask", "led_ptf", "ring_to_led_mask",
    "SearchResult", "compare_patterns", "exhaustive_scan", "pruned_scan",
    "RingPattern", "SourcePointSet", "discretize_pattern", "parse_pattern", "pattern_from_index",
    "PTFGrid", "RadialProfile", "direct_pattern_ptf", "pattern_ptf", "point_kernel",
    "radial_profile", "ring_ptf",
]
