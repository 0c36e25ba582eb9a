"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Reports best-of-``repeat`` wall time for the point-kernel accumulation of one
12-bit pattern and for scoring every 12-bit mask, plus the largest difference
between the two backends' outputs.
"""

import argparse
import time

import numpy as np

from ptfopt import _backend
from ptfopt.config import OpticsConfig
from ptfopt.search import _bin_weights, _split_tables
from ptfopt.source import RingPattern, discretize_pattern
from ptfopt.transfer import PUPIL_RADIUS, ring_profiles


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_accumulate(kernels, cfg, points, threads):
    def run():
        out = np.zeros((cfg.grid_size, cfg.grid_size))
        kernels.accumulate_points(out, cfg.freq_axis(), points, cfg.objective_na,
                                  cfg.wavenumber * cfg.defocus, PUPIL_RADIUS, threads)
        return out
    return run


def bench_scan(kernels, tables, weights, n, threads):
    lt, lc, ht, hc = tables
    total = (1 << n) - 1

    def run():
        cut = np.zeros(total, dtype=np.int32)
        zc = np.zeros(total, dtype=np.int32)
        mean = np.zeros(total)
        kernels.scan_masks(lt, lc, ht, hc, n // 2, 1, total + 1, weights, 1e-3, cut, zc, mean, threads)
        return cut, zc, mean
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--bits", type=int, default=12)
    args = ap.parse_args()

    if _backend.compiled_kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    cfg = OpticsConfig()
    n = args.bits
    threads = _backend.thread_count()
    points = np.ascontiguousarray(discretize_pattern(RingPattern(n, (1 << n) - 1)).points)

    rows, counts = ring_profiles(n, cfg)
    weights = _bin_weights(np.arange(rows.shape[1]) * cfg.freq_step, "uniform")
    lo = n // 2
    tables = (*_split_tables(rows, counts, lo), *_split_tables(rows[lo:], counts[lo:], n - lo))

    print(f"grid {cfg.grid_size}^2, {n} bits, {len(points)} source points, {threads} threads")
    print(f"{'kernel':<28}{'compiled':>12}{'fallback':>12}{'speedup':>10}{'max diff':>12}")
    cases = [
        ("accumulate_points", lambda k, t: bench_accumulate(k, cfg, points, t)),
        (f"scan_masks ({(1 << n) - 1} masks)", lambda k, t: bench_scan(k, tables, weights, n, t)),
    ]
    for name, make in cases:
        tc, out_c = best_of(make(_backend.compiled_kernels, threads), args.repeat)
        tp, out_p = best_of(make(_backend.python_kernels, 1), args.repeat)
        if isinstance(out_c, tuple):
            diff = max(float(np.max(np.abs(a.astype(float) - b.astype(float)))) for a, b in zip(out_c, out_p))
        else:
            diff = float(np.max(np.abs(out_c - out_p)))
        print(f"{name:<28}{tc * 1e3:>10.1f}ms{tp * 1e3:>10.1f}ms{tp / tc:>9.1f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
