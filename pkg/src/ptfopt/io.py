"""File formats: raw float32 grids with JSON sidecars, CSV tables, run manifests.

A grid ``name`` is stored as ``name.f32`` (little-endian float32, row-major,
``grid_size x grid_size``) next to ``name.json``. JSON is written with sorted
keys and no timestamps so identical runs give identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .config import OpticsConfig
from .criteria import CSV_HEADER, CriteriaReport
from .errors import ValidationError
from .transfer import PTFGrid, RadialProfile

GRID_DTYPE = "<f4"
GRID_SUFFIX = ".f32"
SIDECAR_SUFFIX = ".json"
REQUIRED_SIDECAR_KEYS = ("grid_size", "freq_extent", "defocus_m", "pattern_mask", "bit_depth")
PROFILE_HEADER = "u_norm,value"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _grid_paths(path) -> tuple[Path, Path]:
    path = Path(path)
    if path.suffix in (GRID_SUFFIX, SIDECAR_SUFFIX):
        path = path.with_suffix("")
    return path.with_name(path.name + GRID_SUFFIX), path.with_name(path.name + SIDECAR_SUFFIX)


def grid_metadata(config: OpticsConfig, pattern_mask: int = 0, bit_depth: int = 0, **extra) -> dict:
    meta = config.to_dict()
    meta.update(pattern_mask=int(pattern_mask), bit_depth=int(bit_depth))
    meta.update(extra)
    return meta


def write_grid(path, values: np.ndarray, meta: dict) -> tuple[Path, Path]:
    """Write ``values`` and a sidecar holding ``meta`` plus shape, dtype and checksum."""
    values = np.asarray(values)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValidationError(f"grids must be square 2D arrays, got shape {values.shape}")
    missing = [k for k in REQUIRED_SIDECAR_KEYS if k not in meta]
    if missing:
        raise ValidationError(f"sidecar metadata lacks {missing}")
    if int(meta["grid_size"]) != values.shape[0]:
        raise ValidationError("sidecar grid_size disagrees with the array shape")
    payload = np.ascontiguousarray(values, dtype=GRID_DTYPE).tobytes()
    bin_path, json_path = _grid_paths(path)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    bin_path.write_bytes(payload)
    sidecar = dict(meta)
    sidecar.update(dtype="float32-le", layout="row-major", payload=bin_path.name,
                   sha256=hashlib.sha256(payload).hexdigest())
    json_path.write_text(_dump_json(sidecar))
    return bin_path, json_path


def write_ptf(path, ptf: PTFGrid) -> tuple[Path, Path]:
    meta = grid_metadata(ptf.config, ptf.pattern_mask, ptf.bit_depth, kind="ptf",
                         normalized=bool(ptf.normalized), point_count=int(ptf.point_count))
    return write_grid(path, ptf.values, meta)


def read_sidecar(path) -> dict:
    _, json_path = _grid_paths(path)
    try:
        meta = json.loads(json_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"sidecar {json_path} is not valid JSON: {exc}") from exc
    if not isinstance(meta, dict):
        raise ValidationError(f"sidecar {json_path} must hold a JSON object")
    return meta


def verify_grid(path) -> dict:
    """Check a grid against its sidecar; returns the sidecar on success."""
    bin_path, json_path = _grid_paths(path)
    meta = read_sidecar(path)
    missing = [k for k in REQUIRED_SIDECAR_KEYS if k not in meta]
    if missing:
        raise ValidationError(f"{json_path.name}: missing keys {missing}")
    n = meta["grid_size"]
    if not isinstance(n, int) or n <= 0:
        raise ValidationError(f"{json_path.name}: bad grid_size {n!r}")
    payload = bin_path.read_bytes()
    if len(payload) != n * n * 4:
        raise ValidationError(
            f"{bin_path.name}: payload has {len(payload)} bytes, expected {n * n * 4} for {n}x{n} float32"
        )
    digest = meta.get("sha256")
    if digest is not None and hashlib.sha256(payload).hexdigest() != digest:
        raise ValidationError(f"{bin_path.name}: checksum does not match its sidecar")
    if not np.all(np.isfinite(np.frombuffer(payload, dtype=GRID_DTYPE))):
        raise ValidationError(f"{bin_path.name}: payload holds non-finite values")
    return meta


def read_grid(path) -> tuple[np.ndarray, dict]:
    """Load a verified grid as float64 together with its sidecar."""
    meta = verify_grid(path)
    bin_path, _ = _grid_paths(path)
    n = meta["grid_size"]
    values = np.fromfile(bin_path, dtype=GRID_DTYPE).reshape(n, n).astype(np.float64)
    return values, meta


def config_from_sidecar(meta: dict) -> OpticsConfig:
    keys = ("wavelength_m", "objective_na", "defocus_m", "grid_size", "freq_extent")
    missing = [k for k in keys if k not in meta]
    if missing:
        raise ValidationError(f"sidecar lacks optical parameters {missing}")
    return OpticsConfig.from_dict({k: meta[k] for k in keys})


def write_profile_csv(path, profile: RadialProfile) -> Path:
    path = Path(path)
    lines = [PROFILE_HEADER]
    lines += [f"{float(u)!r},{float(v)!r}" for u, v in zip(profile.radii, profile.values)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_profile_csv(path) -> RadialProfile:
    text = Path(path).read_text().splitlines()
    if not text or text[0] != PROFILE_HEADER:
        raise ValidationError(f"{path}: expected header {PROFILE_HEADER!r}")
    data = np.array([[float(x) for x in line.split(",")] for line in text[1:] if line], dtype=np.float64)
    data = data.reshape(-1, 2)
    return RadialProfile(data[:, 0], data[:, 1])


def write_reports_csv(path, reports) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rep in reports:
            fh.write(rep.csv_row() + "\n")
    return path


def read_reports_csv(path) -> list[CriteriaReport]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValidationError(f"{path}: expected header {CSV_HEADER!r}")
    out = []
    for line in lines[1:]:
        mask, bits, cut, zc, mean = line.split(",")
        out.append(CriteriaReport(int(mask), int(bits), float(cut), int(zc), float(mean)))
    return out


def write_manifest(out_dir, command: str, config: OpticsConfig, parameters: dict) -> Path:
    path = Path(out_dir) / "manifest.json"
    doc = {"command": command, "config": config.to_dict(), "parameters": parameters}
    path.write_text(_dump_json(doc))
    return path
