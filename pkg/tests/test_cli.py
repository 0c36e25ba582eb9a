import json
import subprocess
import sys

import numpy as np
import pytest

from ptfopt.cli import main
from ptfopt.io import read_grid, read_profile_csv, read_reports_csv

FAST = ["--grid", "128", "--samples-per-ring", "4"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def scan_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scan")
    assert main(["scan", "--bits", "12", "--out", str(out)]) == 0
    return out


def test_scan_artifacts(scan_dir):
    reps = read_reports_csv(scan_dir / "scan_report.csv")
    assert len(reps) == 4095
    assert [r.pattern_mask for r in reps] == list(range(1, 4096))
    assert (scan_dir / "optimal.txt").read_text() == "2048\n"
    surv = (scan_dir / "survivors.csv").read_text().splitlines()
    assert surv[0] == "mask,stage,rank"
    assert "2048,2,1" in surv
    manifest = json.loads((scan_dir / "manifest.json").read_text())
    assert manifest["command"] == "scan" and manifest["parameters"]["bits"] == 12


def test_scan_byte_identical(scan_dir, tmp_path):
    assert main(["scan", "--bits", "12", "--out", str(tmp_path)]) == 0
    for name in ("scan_report.csv", "survivors.csv", "optimal.txt", "manifest.json"):
        assert (tmp_path / name).read_bytes() == (scan_dir / name).read_bytes()


def test_scan_pruned_above_cap(capsys, tmp_path):
    code, out, _ = run(capsys, "scan", "--bits", "24", "--samples-per-ring", "2", *FAST[:2], "--out", tmp_path)
    assert code == 0
    assert (tmp_path / "optimal.txt").read_text() == f"{1 << 23}\n"
    assert json.loads((tmp_path / "manifest.json").read_text())["parameters"]["method"] == "pruned"


def test_empty_pattern_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "ptf", "--pattern", "0", "--out", tmp_path)
    assert code == 2
    assert err.startswith("error[validation]:") and "empty pattern" in err


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ptf"])
    assert exc.value.code == 1
    assert "error[usage]" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_numerical_error_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "scan", "--bits", "4", "--z", "0", *FAST, "--out", tmp_path)
    assert code == 3 and err.startswith("error[numerical]")


def test_io_error_exit_4(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "ptf", "--pattern", "1", *FAST, "--out", blocker / "sub")
    assert code == 4 and err.startswith("error[io]")


def test_bad_config_file_exit_2(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"wavelength_m": 5e-7, "zoom": 2}))
    code, _, err = run(capsys, "ptf", "--pattern", "1", "--config", cfg, "--out", tmp_path)
    assert code == 2 and "unknown" in err


def test_config_file_and_overrides(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"wavelength_m": 6e-7, "grid_size": 128}))
    code, _, _ = run(capsys, "ptf", "--pattern", "R11", "--config", cfg, "--na", "0.5",
                     "--samples-per-ring", "2", "--out", tmp_path)
    assert code == 0
    _, meta = read_grid(tmp_path / "ptf")
    assert meta["wavelength_m"] == 6e-7 and meta["objective_na"] == 0.5 and meta["grid_size"] == 128
    assert meta["pattern_mask"] == 2048


@pytest.mark.parametrize("spec", ["2048", "0b100000000000", "R11"])
def test_pattern_syntaxes(capsys, tmp_path, spec):
    code, _, _ = run(capsys, "profile", "--pattern", spec, *FAST, "--out", tmp_path)
    assert code == 0
    assert read_reports_csv(tmp_path / "report.csv")[0].pattern_mask == 2048
    assert read_profile_csv(tmp_path / "profile.csv").values[0] == 0.0


def test_compare(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", "--masks", "2048;3072;R8,R9,R10,R11", *FAST, "--out", tmp_path)
    assert code == 0
    for m in (2048, 3072, 3840):
        assert (tmp_path / f"profile_{m}.csv").exists()
    reps = read_reports_csv(tmp_path / "compare.csv")
    assert [r.pattern_mask for r in reps] == [2048, 3072, 3840]


def test_simulate_reconstruct_chain(capsys, tmp_path):
    sim, rec = tmp_path / "sim", tmp_path / "rec"
    code, _, _ = run(capsys, "simulate", "--pattern", "2048", "--z", "0.5e-6", "--out", sim)
    assert code == 0
    for name in ("phase_true", "intensity_pos", "intensity_neg", "intensity_focus"):
        assert (sim / f"{name}.f32").exists() and (sim / f"{name}.json").exists()
    code, out, _ = run(capsys, "reconstruct", "--input", sim, "--out", rec)
    assert code == 0
    line = out.strip().splitlines()[-1]
    assert line.startswith("rmse_passband=")
    rel = float(line.split("relative_to_peak=")[1])
    assert rel < 0.05
    phase, meta = read_grid(rec / "phase_rec")
    assert meta["kind"] == "phase" and abs(phase.mean()) < 1e-6


def test_simulate_bead_then_reconstruct(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--object", "bead", "--pattern", "2048", "--z", "0.5e-6",
                     "--out", tmp_path / "s")
    assert code == 0
    code, out, _ = run(capsys, "reconstruct", "--input", tmp_path / "s", "--out", tmp_path / "r")
    assert code == 0 and "rmse_passband=" in out


def test_simulate_is_reproducible(capsys, tmp_path):
    for d in ("a", "b"):
        assert run(capsys, "simulate", "--pattern", "2048", "--seed", "9", *FAST, "--out", tmp_path / d)[0] == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    seed = json.loads((tmp_path / "a" / "manifest.json").read_text())["parameters"]["object_params"]["seed"]
    assert seed == 9


def test_reconstruct_missing_input(capsys, tmp_path):
    code, _, err = run(capsys, "reconstruct", "--input", tmp_path / "nothing", "--out", tmp_path)
    assert code == 4


def test_led_map(capsys, tmp_path):
    code, out, _ = run(capsys, "led-map", "--pattern", "128", "--grid", "128", "--out", tmp_path)
    assert code == 0
    rows = (tmp_path / "led_mask.txt").read_text().splitlines()
    assert len(rows) == 15
    assert json.loads((tmp_path / "led_mask.json").read_text())["used_extent"] == 15
    assert (tmp_path / "led_profile.csv").exists()
    code, _, err = run(capsys, "led-map", "--pattern", "2048", "--bits", "12", "--out", tmp_path)
    assert code == 2


def test_verify(capsys, tmp_path):
    assert run(capsys, "ptf", "--pattern", "5", *FAST, "--out", tmp_path)[0] == 0
    code, out, _ = run(capsys, "verify", tmp_path)
    assert code == 0 and "ok" in out
    (tmp_path / "ptf.f32").write_bytes(b"\0" * 12)
    code, _, err = run(capsys, "verify", tmp_path / "ptf")
    assert code == 2 and "error[validation]" in err


def test_verify_nothing(capsys, tmp_path):
    assert run(capsys, "verify", tmp_path)[0] == 2


def test_console_script_and_module_entry(tmp_path):
    for cmd in (["ptfopt"], [sys.executable, "-m", "ptfopt"]):
        r = subprocess.run(cmd + ["ptf", "--pattern", "0", "--out", str(tmp_path)],
                           capture_output=True, text=True)
        assert r.returncode == 2
        assert "empty pattern" in r.stderr
