import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptfopt import _backend
from ptfopt.config import OpticsConfig
from ptfopt.search import _bin_weights, _split_tables, exhaustive_scan
from ptfopt.source import RingPattern, discretize_pattern
from ptfopt.transfer import PUPIL_RADIUS, ring_profiles

compiled = pytest.mark.skipif(_backend.compiled_kernels is None, reason="compiled kernels not built")
py = _backend.python_kernels


def _accumulate(kernels, points, cfg, threads=1):
    axis = cfg.freq_axis()
    out = np.zeros((cfg.grid_size, cfg.grid_size))
    kernels.accumulate_points(out, axis, np.ascontiguousarray(points), cfg.objective_na,
                              cfg.wavenumber * cfg.defocus, PUPIL_RADIUS, threads)
    return out


def test_backend_name_consistent():
    assert _backend.BACKEND in ("compiled", "python")
    assert (_backend.kernels is _backend.compiled_kernels) == (_backend.BACKEND == "compiled")


@compiled
@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4095))
def test_accumulate_matches_fallback(mask):
    cfg = OpticsConfig(grid_size=64)
    pts = discretize_pattern(RingPattern(12, mask), 2).points
    a = _accumulate(_backend.compiled_kernels, pts, cfg)
    b = _accumulate(py, pts, cfg)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(b))) * len(pts)


@compiled
def test_accumulate_thread_count_invariant():
    cfg = OpticsConfig(grid_size=96)
    pts = discretize_pattern(RingPattern(12, 2048 | 5), 4).points
    one = _accumulate(_backend.compiled_kernels, pts, cfg, 1)
    many = _accumulate(_backend.compiled_kernels, pts, cfg, 4)
    np.testing.assert_array_equal(one, many)


@compiled
def test_accumulate_points_off_grid_edge():
    cfg = OpticsConfig(grid_size=64)
    pts = np.array([[0.7, -0.7], [0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(_accumulate(_backend.compiled_kernels, pts, cfg),
                               _accumulate(py, pts, cfg), rtol=0, atol=1e-13)


@compiled
@pytest.mark.parametrize("weighting", ["uniform", "area"])
def test_scan_masks_match_fallback(weighting):
    cfg = OpticsConfig(grid_size=128)
    n = 10
    rows, counts = ring_profiles(n, cfg, 4)
    weights = _bin_weights(np.arange(rows.shape[1]) * cfg.freq_step, weighting)
    lo = n // 2
    lt, lc = _split_tables(rows, counts, lo)
    ht, hc = _split_tables(rows[lo:], counts[lo:], n - lo)
    total = (1 << n) - 1
    outs = []
    for kern, threads in ((_backend.compiled_kernels, 3), (py, 1)):
        cut = np.zeros(total, dtype=np.int32)
        zc = np.zeros(total, dtype=np.int32)
        mean = np.zeros(total)
        kern.scan_masks(lt, lc, ht, hc, lo, 1, total + 1, weights, 1e-3, cut, zc, mean, threads)
        outs.append((cut, zc, mean))
    np.testing.assert_array_equal(outs[0][0], outs[1][0])
    np.testing.assert_array_equal(outs[0][1], outs[1][1])
    np.testing.assert_allclose(outs[0][2], outs[1][2], rtol=1e-12, atol=0)


def test_exhaustive_scan_same_optimum_on_both_backends(small_cfg):
    a = exhaustive_scan(8, small_cfg, samples_per_ring=4, kernels=py)
    b = exhaustive_scan(8, small_cfg, samples_per_ring=4)
    assert a.optimal == b.optimal
    np.testing.assert_array_equal(a.cutoff, b.cutoff)
    np.testing.assert_array_equal(a.crossings, b.crossings)


def test_thread_count_env(monkeypatch):
    monkeypatch.delenv("PTFOPT_THREADS", raising=False)
    full = _backend.thread_count()
    assert full >= 1
    monkeypatch.setenv("PTFOPT_THREADS", "1")
    assert _backend.thread_count() == 1
    monkeypatch.setenv("PTFOPT_THREADS", "100000")
    assert _backend.thread_count() == full
    monkeypatch.setenv("PTFOPT_THREADS", "0")
    assert _backend.thread_count() == 1
    monkeypatch.setenv("PTFOPT_THREADS", "lots")
    assert _backend.thread_count() == full


def test_pure_python_env_selects_fallback():
    import subprocess
    import sys
    code = "import ptfopt; print(ptfopt.BACKEND)"
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                       env={"PTFOPT_PURE_PYTHON": "1", "PATH": ""})
    assert r.stdout.strip() == "python"
