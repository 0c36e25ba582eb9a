import json

import numpy as np
import pytest

from ptfopt import OpticsConfig, RingPattern, ValidationError, pattern_ptf, radial_profile
from ptfopt.criteria import CriteriaReport
from ptfopt.io import (
    config_from_sidecar,
    grid_metadata,
    read_grid,
    read_profile_csv,
    read_reports_csv,
    read_sidecar,
    verify_grid,
    write_grid,
    write_manifest,
    write_profile_csv,
    write_ptf,
    write_reports_csv,
)


@pytest.fixture
def ptf(small_cfg):
    return pattern_ptf(RingPattern(12, 2048), small_cfg, 4)


def test_ptf_roundtrip(tmp_path, ptf):
    bin_path, json_path = write_ptf(tmp_path / "g", ptf)
    assert bin_path.name == "g.f32" and json_path.name == "g.json"
    n = ptf.config.grid_size
    assert bin_path.stat().st_size == n * n * 4
    values, meta = read_grid(tmp_path / "g")
    np.testing.assert_array_equal(values, ptf.values.astype("<f4").astype(float))
    for key in ("grid_size", "freq_extent", "defocus_m", "pattern_mask", "bit_depth"):
        assert key in meta
    assert meta["pattern_mask"] == 2048 and meta["bit_depth"] == 12
    assert config_from_sidecar(meta) == ptf.config


def test_payload_layout_little_endian_row_major(tmp_path, small_cfg):
    n = small_cfg.grid_size
    vals = np.arange(n * n, dtype=float).reshape(n, n)
    write_grid(tmp_path / "a", vals, grid_metadata(small_cfg))
    raw = (tmp_path / "a.f32").read_bytes()
    assert np.frombuffer(raw[:8], dtype="<f4").tolist() == [0.0, 1.0]
    assert np.frombuffer(raw[4 * n: 4 * n + 4], dtype="<f4")[0] == n


def test_read_accepts_either_suffix(tmp_path, ptf):
    write_ptf(tmp_path / "g", ptf)
    a, _ = read_grid(tmp_path / "g.f32")
    b, _ = read_grid(tmp_path / "g.json")
    np.testing.assert_array_equal(a, b)


def test_verify_detects_truncation(tmp_path, ptf):
    write_ptf(tmp_path / "g", ptf)
    p = tmp_path / "g.f32"
    p.write_bytes(p.read_bytes()[:-4])
    with pytest.raises(ValidationError, match="bytes"):
        verify_grid(tmp_path / "g")


def test_verify_detects_corruption(tmp_path, ptf):
    write_ptf(tmp_path / "g", ptf)
    p = tmp_path / "g.f32"
    raw = bytearray(p.read_bytes())
    raw[100] ^= 0xFF
    p.write_bytes(bytes(raw))
    with pytest.raises(ValidationError, match="checksum"):
        verify_grid(tmp_path / "g")


def test_verify_missing_keys(tmp_path, ptf):
    write_ptf(tmp_path / "g", ptf)
    meta = read_sidecar(tmp_path / "g")
    del meta["bit_depth"]
    (tmp_path / "g.json").write_text(json.dumps(meta))
    with pytest.raises(ValidationError, match="missing"):
        verify_grid(tmp_path / "g")


def test_verify_bad_json(tmp_path, ptf):
    write_ptf(tmp_path / "g", ptf)
    (tmp_path / "g.json").write_text("{")
    with pytest.raises(ValidationError):
        verify_grid(tmp_path / "g")


def test_missing_payload_is_oserror(tmp_path, ptf):
    write_ptf(tmp_path / "g", ptf)
    (tmp_path / "g.f32").unlink()
    with pytest.raises(OSError):
        verify_grid(tmp_path / "g")


def test_write_grid_validation(tmp_path, small_cfg):
    with pytest.raises(ValidationError):
        write_grid(tmp_path / "x", np.zeros((4, 5)), grid_metadata(small_cfg))
    with pytest.raises(ValidationError):
        write_grid(tmp_path / "x", np.zeros((4, 4)), grid_metadata(small_cfg))
    with pytest.raises(ValidationError):
        write_grid(tmp_path / "x", np.zeros((128, 128)), {"grid_size": 128})


def test_writes_are_byte_identical(tmp_path, ptf):
    write_ptf(tmp_path / "a", ptf)
    write_ptf(tmp_path / "b", ptf)
    assert (tmp_path / "a.f32").read_bytes() == (tmp_path / "b.f32").read_bytes()
    a = read_sidecar(tmp_path / "a")
    b = read_sidecar(tmp_path / "b")
    a.pop("payload"), b.pop("payload")
    assert a == b


def test_profile_csv_roundtrip(tmp_path, ptf):
    prof = radial_profile(ptf)
    path = write_profile_csv(tmp_path / "p.csv", prof)
    assert path.read_text().splitlines()[0] == "u_norm,value"
    back = read_profile_csv(path)
    np.testing.assert_array_equal(back.radii, prof.radii)
    np.testing.assert_array_equal(back.values, prof.values)


def test_reports_csv_roundtrip(tmp_path):
    reps = [CriteriaReport(2048, 12, 1.90625, 0, 0.2034893929931304),
            CriteriaReport(3, 12, 1.15625, 2, 1e-17)]
    path = write_reports_csv(tmp_path / "r.csv", reps)
    assert path.read_text().splitlines()[0] == "mask,bit_depth,cutoff,crossings,mean_abs"
    assert read_reports_csv(path) == reps


def test_bad_csv_header(tmp_path):
    (tmp_path / "r.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValidationError):
        read_reports_csv(tmp_path / "r.csv")
    with pytest.raises(ValidationError):
        read_profile_csv(tmp_path / "r.csv")


def test_manifest(tmp_path):
    cfg = OpticsConfig()
    path = write_manifest(tmp_path, "scan", cfg, {"bits": 12})
    doc = json.loads(path.read_text())
    assert doc == {"command": "scan", "config": cfg.to_dict(), "parameters": {"bits": 12}}
