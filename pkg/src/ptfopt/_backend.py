"""Select the compiled kernels when available, else the numpy fallback.

Set ``PTFOPT_PURE_PYTHON=1`` to force the fallback and ``PTFOPT_THREADS`` to cap
the thread count of the compiled kernels.
"""

import logging
import os
from types import SimpleNamespace

from . import _fallback as python_kernels

log = logging.getLogger(__name__)


def _load_compiled():
    try:
        from ._ptf_kernel import accumulate_points
        from ._scan_kernel import scan_masks
    except ImportError as exc:  # extensions not built
        log.debug("compiled kernels unavailable (%s); using numpy fallback", exc)
        return None
    return SimpleNamespace(accumulate_points=accumulate_points, scan_masks=scan_masks)


compiled_kernels = None
if os.environ.get("PTFOPT_PURE_PYTHON", "") in ("", "0"):
    compiled_kernels = _load_compiled()

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "compiled" if compiled_kernels is not None else "python"


def thread_count() -> int:
    if hasattr(os, "sched_getaffinity"):
        available = len(os.sched_getaffinity(0))
    else:
        available = os.cpu_count() or 1
    raw = os.environ.get("PTFOPT_THREADS")
    if raw:
        try:
            return max(1, min(int(raw), available))
        except ValueError:
            log.warning("ignoring non-integer PTFOPT_THREADS=%r", raw)
    return available
