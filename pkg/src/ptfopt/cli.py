"""Command-line entry point: ``ptfopt <command> [options]``.

Each command writes one artifact set plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 1 usage, 2 validation, 3 numerical, 4 file IO.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import OpticsConfig, load_config
from .criteria import DEFAULT_AMP_EPS, WEIGHTINGS, score_profile
from .errors import NumericalError, ValidationError
from .imaging import (
    IntensityStack,
    PhaseField,
    difference_spectrum,
    forward_intensity,
    make_test_object,
    passband_mask,
    passband_rmse,
    reconstruct_phase,
    default_beta,
)
from .io import (
    GRID_SUFFIX,
    SIDECAR_SUFFIX,
    config_from_sidecar,
    grid_metadata,
    read_grid,
    verify_grid,
    write_grid,
    write_manifest,
    write_profile_csv,
    write_ptf,
    write_reports_csv,
)
from .led import LedArrayConfig, led_ptf, ring_to_led_mask
from .search import MAX_EXHAUSTIVE_BITS, compare_patterns, exhaustive_scan, pruned_scan
from .source import DEFAULT_SAMPLES_PER_RING, parse_pattern
from .transfer import pattern_ptf, radial_profile

EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"error[usage]: {message}\n")


def _add_optics(p, bits_default=12):
    p.add_argument("--config", type=Path, help="JSON optics config; flags below override it")
    p.add_argument("--wavelength", type=float, help="wavelength in m")
    p.add_argument("--na", type=float, help="objective numerical aperture")
    p.add_argument("--z", type=float, help="defocus in m (default 0.5e-6)")
    p.add_argument("--grid", type=int, help="frequency grid size per side")
    p.add_argument("--freq-extent", type=float, help="half-width of the normalized frequency grid")
    p.add_argument("--bits", type=int, default=bits_default, help="ring bit depth N")
    p.add_argument("--samples-per-ring", type=int, default=DEFAULT_SAMPLES_PER_RING)
    p.add_argument("--amp-eps", type=float, default=DEFAULT_AMP_EPS,
                   help="negligible-response threshold relative to the profile peak")
    p.add_argument("--weighting", choices=WEIGHTINGS, default="uniform")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptfopt", description="Ring-coded illumination PTF design and search")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ptf", help="PTF grid of one pattern")
    _add_optics(p)
    p.add_argument("--pattern", required=True, help="decimal, 0b binary, or ring list like R7,R11")

    p = sub.add_parser("profile", help="radial profile and criteria of one pattern")
    _add_optics(p)
    p.add_argument("--pattern", required=True)

    p = sub.add_parser("scan", help="score every pattern and apply the filter cascade")
    _add_optics(p)
    p.add_argument("--top-k", type=int, default=1,
                   help=f"ranked patterns kept by the pruned search used above {MAX_EXHAUSTIVE_BITS} bits")

    p = sub.add_parser("compare", help="profiles and criteria of several patterns")
    _add_optics(p)
    p.add_argument("--masks", required=True, help="semicolon-separated patterns, e.g. 2048;3840;R7,R11")

    p = sub.add_parser("simulate", help="defocused intensity pair of a test object")
    _add_optics(p)
    p.add_argument("--pattern", required=True)
    p.add_argument("--object", default="smooth_random", choices=("bead", "resolution_bars", "smooth_random"))
    p.add_argument("--seed", type=int, default=0, help="seed of the smooth_random object")
    p.add_argument("--peak", type=float, default=0.2, help="peak phase of the smooth_random object (rad)")
    p.add_argument("--band", type=float, default=0.8, help="band limit of the smooth_random object")

    p = sub.add_parser("reconstruct", help="phase from a simulated intensity pair")
    p.add_argument("--input", type=Path, required=True, help="directory written by 'simulate'")
    p.add_argument("--beta", type=float, help="Tikhonov parameter (default 1e-3 * max H^2)")
    p.add_argument("--samples-per-ring", type=int, default=DEFAULT_SAMPLES_PER_RING)
    p.add_argument("--amp-eps", type=float, default=DEFAULT_AMP_EPS)
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("led-map", help="LED-array realization of a ring pattern")
    _add_optics(p, bits_default=8)
    p.add_argument("--pattern", required=True)
    p.add_argument("--extent", type=int, default=15, help="LEDs per side of the used array (odd)")
    p.add_argument("--pitch", type=float, default=1.25e-3, help="LED pitch in m")
    p.add_argument("--na-per-led", type=float, help="normalized illumination NA per LED step")

    p = sub.add_parser("verify", help="check grid payloads against their sidecars")
    p.add_argument("paths", nargs="+", type=Path, help="grid files or directories")
    return parser


def _config(args) -> OpticsConfig:
    base = load_config(args.config) if args.config else OpticsConfig()
    data = base.to_dict()
    for flag, key in (("wavelength", "wavelength_m"), ("na", "objective_na"), ("z", "defocus_m"),
                      ("grid", "grid_size"), ("freq_extent", "freq_extent")):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    return OpticsConfig.from_dict(data)


def _common_params(args) -> dict:
    return dict(bits=args.bits, samples_per_ring=args.samples_per_ring,
                amp_eps=args.amp_eps, weighting=args.weighting)


def _check_samples(n: int) -> None:
    if n < 1:
        raise ValidationError("--samples-per-ring must be >= 1")


def cmd_ptf(args, out: Path) -> int:
    config = _config(args)
    _check_samples(args.samples_per_ring)
    pattern = parse_pattern(args.pattern, args.bits)
    ptf = pattern_ptf(pattern, config, args.samples_per_ring)
    write_ptf(out / "ptf", ptf)
    write_manifest(out, "ptf", config, dict(_common_params(args), pattern=pattern.mask))
    print(f"pattern {pattern.mask} ({pattern.binary()}): {ptf.point_count} source points")
    return 0


def cmd_profile(args, out: Path) -> int:
    config = _config(args)
    _check_samples(args.samples_per_ring)
    pattern = parse_pattern(args.pattern, args.bits)
    profile = radial_profile(pattern_ptf(pattern, config, args.samples_per_ring))
    rep = score_profile(profile, pattern.mask, pattern.bit_depth, args.amp_eps, args.weighting)
    write_profile_csv(out / "profile.csv", profile)
    write_reports_csv(out / "report.csv", [rep])
    write_manifest(out, "profile", config, dict(_common_params(args), pattern=pattern.mask))
    print(rep.csv_row())
    return 0


def cmd_scan(args, out: Path) -> int:
    config = _config(args)
    _check_samples(args.samples_per_ring)
    params = _common_params(args)
    if args.bits <= MAX_EXHAUSTIVE_BITS:
        res = exhaustive_scan(args.bits, config, args.samples_per_ring, args.amp_eps, args.weighting)
        write_reports_csv(out / "scan_report.csv", res.reports)
        stage2 = set(res.survivors_stage2.tolist())
        with (out / "survivors.csv").open("w") as fh:
            fh.write("mask,stage,rank\n")
            rank = {int(m): i + 1 for i, m in enumerate(res.ranked)}
            for m in res.survivors_stage1.tolist():
                fh.write(f"{m},{2 if m in stage2 else 1},{rank.get(m, '')}\n")
        optimal = res.optimal
        params.update(method="exhaustive", threshold=res.threshold,
                      stage1=int(len(res.survivors_stage1)), stage2=int(len(res.survivors_stage2)))
        print(f"scanned {len(res.cutoff)} patterns; stage 1: {len(res.survivors_stage1)}, "
              f"stage 2: {len(res.survivors_stage2)}")
    else:
        res = pruned_scan(args.bits, config, args.samples_per_ring, args.amp_eps, args.weighting, args.top_k)
        write_reports_csv(out / "scan_report.csv", res.ranked)
        with (out / "survivors.csv").open("w") as fh:
            fh.write("mask,stage,rank\n")
            for i, rep in enumerate(res.ranked):
                fh.write(f"{rep.pattern_mask},2,{i + 1}\n")
        optimal = res.optimal
        params.update(method="pruned", top_k=args.top_k, threshold=res.threshold,
                      nodes_visited=res.nodes_visited)
        print(f"pruned search visited {res.nodes_visited} nodes")
    (out / "optimal.txt").write_text(f"{optimal}\n")
    write_manifest(out, "scan", config, params)
    print(f"optimal pattern: {optimal}")
    return 0


def cmd_compare(args, out: Path) -> int:
    config = _config(args)
    _check_samples(args.samples_per_ring)
    tokens = [t.strip() for t in args.masks.split(";") if t.strip()]
    if not tokens:
        raise ValidationError("--masks lists no pattern")
    masks = [parse_pattern(t, args.bits).mask for t in tokens]
    results = compare_patterns(masks, args.bits, config, args.samples_per_ring, args.amp_eps, args.weighting)
    for item in results:
        write_profile_csv(out / f"profile_{item.report.pattern_mask}.csv", item.profile)
    write_reports_csv(out / "compare.csv", [item.report for item in results])
    write_manifest(out, "compare", config, dict(_common_params(args), masks=masks))
    for item in results:
        print(item.report.csv_row())
    return 0


def cmd_simulate(args, out: Path) -> int:
    config = _config(args)
    _check_samples(args.samples_per_ring)
    if config.defocus == 0:
        raise ValidationError("simulate needs a nonzero --z to form a +z/-z pair")
    pattern = parse_pattern(args.pattern, args.bits)
    obj_params = {}
    if args.object == "smooth_random":
        obj_params = dict(seed=args.seed, peak=args.peak, band=args.band)
    obj = make_test_object(args.object, config, **obj_params)
    z = abs(config.defocus)
    stack = forward_intensity(obj, pattern, [z, -z, 0.0], config, args.samples_per_ring)
    common = dict(pixel_pitch_m=config.pixel_pitch, samples_per_ring=args.samples_per_ring,
                  object=args.object, object_params=obj_params)
    cfg_pos = config.with_defocus(z)
    write_grid(out / "phase_true", obj.phase.values,
               grid_metadata(cfg_pos, pattern.mask, pattern.bit_depth, kind="phase", **common))
    # the in-focus plane is recorded for completeness; reconstruction uses the +z/-z pair
    for name, zz in (("intensity_pos", z), ("intensity_neg", -z), ("intensity_focus", 0.0)):
        write_grid(out / name, stack.plane(zz),
                   grid_metadata(config.with_defocus(zz), pattern.mask, pattern.bit_depth,
                                 kind="intensity", background=stack.background, **common))
    write_manifest(out, "simulate", config,
                   dict(bits=args.bits, pattern=pattern.mask, samples_per_ring=args.samples_per_ring,
                        object=args.object, object_params=obj_params))
    print(f"simulated {args.object} under pattern {pattern.mask} at z = +/-{z:g} m")
    return 0


def cmd_reconstruct(args, out: Path) -> int:
    src = args.input
    pos, meta_pos = read_grid(src / "intensity_pos")
    neg, meta_neg = read_grid(src / "intensity_neg")
    config = config_from_sidecar(meta_pos)
    if config_from_sidecar(meta_neg) != config.with_defocus(-config.defocus):
        raise ValidationError("intensity_pos and intensity_neg are not a symmetric defocus pair")
    if config.defocus <= 0:
        raise ValidationError("intensity_pos must be recorded at positive defocus")
    _check_samples(args.samples_per_ring)
    pattern = parse_pattern(str(meta_pos["pattern_mask"]), int(meta_pos["bit_depth"]))
    z = config.defocus
    stack = IntensityStack(planes=[(z, pos), (-z, neg)], background=float(meta_pos.get("background", 1.0)))
    ptf = pattern_ptf(pattern, config, args.samples_per_ring)
    beta = default_beta(ptf) if args.beta is None else args.beta
    phase = reconstruct_phase(difference_spectrum(stack, z), ptf, beta)
    write_grid(out / "phase_rec", phase.values,
               grid_metadata(config, pattern.mask, pattern.bit_depth, kind="phase",
                             pixel_pitch_m=config.pixel_pitch, beta=beta,
                             samples_per_ring=args.samples_per_ring))
    params = dict(input=str(src), pattern=pattern.mask, beta=beta, samples_per_ring=args.samples_per_ring)
    truth_path = src / ("phase_true" + SIDECAR_SUFFIX)
    if truth_path.exists():
        truth, _ = read_grid(src / "phase_true")
        band = passband_mask(ptf, args.amp_eps)
        rmse = passband_rmse(phase, PhaseField(truth, config.pixel_pitch), band)
        peak = float(np.max(np.abs(truth)))
        rel = rmse / peak if peak > 0 else float("nan")
        line = f"rmse_passband={rmse:.6e} rad relative_to_peak={rel:.6e}"
        (out / "rmse.txt").write_text(line + "\n")
        params["rmse_passband"] = rmse
        print(line)
    write_manifest(out, "reconstruct", config, params)
    return 0


def cmd_led_map(args, out: Path) -> int:
    config = _config(args)
    led_cfg = LedArrayConfig(pitch=args.pitch, used_extent=args.extent, na_per_led=args.na_per_led)
    pattern = parse_pattern(args.pattern, args.bits)
    mask = ring_to_led_mask(pattern, led_cfg)
    (out / "led_mask.txt").write_text(mask.to_ascii())
    (out / "led_mask.json").write_text(mask.to_json())
    ptf = led_ptf(mask, led_cfg, config)
    profile = radial_profile(ptf)
    write_ptf(out / "led_ptf", ptf)
    write_profile_csv(out / "led_profile.csv", profile)
    rep = score_profile(profile, pattern.mask, pattern.bit_depth, args.amp_eps, args.weighting)
    write_reports_csv(out / "led_report.csv", [rep])
    write_manifest(out, "led-map", config,
                   dict(bits=args.bits, pattern=pattern.mask, extent=args.extent, pitch=args.pitch,
                        na_per_led=led_cfg.na_per_led, amp_eps=args.amp_eps, weighting=args.weighting))
    print(f"{mask.count} LEDs on; " + rep.csv_row())
    return 0


def cmd_verify(args, out=None) -> int:
    targets = []
    for path in args.paths:
        if path.is_dir():
            targets += sorted(p.with_suffix("") for p in path.glob("*" + GRID_SUFFIX))
            orphans = [p for p in sorted(path.glob("*" + SIDECAR_SUFFIX))
                       if p.name != "manifest.json" and p.name != "led_mask.json"
                       and not p.with_suffix(GRID_SUFFIX).exists()]
            if orphans:
                raise ValidationError(f"sidecar without payload: {orphans[0]}")
        else:
            targets.append(path)
    if not targets:
        raise ValidationError("no grid files found to verify")
    for t in targets:
        verify_grid(t)
        print(f"ok {t}")
    return 0


COMMANDS = {
    "ptf": cmd_ptf, "profile": cmd_profile, "scan": cmd_scan, "compare": cmd_compare,
    "simulate": cmd_simulate, "reconstruct": cmd_reconstruct, "led-map": cmd_led_map,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, args.out)
    except ValidationError as exc:
        print(f"error[validation]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
