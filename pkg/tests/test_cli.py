import csv
import subprocess
import sys

import mpmath
import pytest

from thermistor.cli import main
from thermistor.io import read_vtk_scalars


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def summary(out):
    return (out / "summary.txt").read_text().splitlines()


def test_property_suite_mode(tmp_path):
    assert main(["property-suite", "--out", str(tmp_path), "--samples", "5000"]) == 0
    lines = summary(tmp_path)
    checks = [ln for ln in lines if not ln.startswith("INFO")]
    assert checks and all(ln.startswith("PASS") for ln in checks)
    assert all("margin" in ln for ln in checks)


def test_verify_potential_mode(tmp_path):
    cfg = write(tmp_path, "[conductivity]\np = 3\n[continuation]\neps_schedule = [0.1, 0]\n")
    assert main(["verify-potential", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    lines = [ln for ln in summary(tmp_path / "o") if "strip" in ln]
    assert len(lines) == 2 and all(ln.startswith("PASS") for ln in lines)


def test_iv_curve_mode(tmp_path):
    cfg = write(tmp_path, "[conductivity]\np = 1\ndelta = 1\n")
    assert main(["iv-curve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    with open(tmp_path / "iv.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["V"]) for r in rows] == [0.0, 1.0, 10.0, 1000.0]
    mpmath.mp.dps = 40
    for r in rows:
        v = mpmath.mpf(r["V"])
        assert float(r["I"]) == pytest.approx(float(v / mpmath.sqrt(1 + v * v)), rel=1e-15, abs=0)


def test_simulate_mode_outputs(tmp_path):
    cfg = write(tmp_path, "[mesh]\nnx = 6\nny = 6\n[time]\nT = 0.5\ndt = 0.1\n")
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--stride", "2"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(
        ["diag.csv", "summary.txt"] + [f"{f}_{k:04d}.vtk" for f in ("phi", "u") for k in (0, 2, 4, 5)]
    )
    with open(out / "diag.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["t", "l1_u"] and rows[0][-2:] == ["I_seg0", "I_seg1"]
    assert len(rows) == 7
    assert len(read_vtk_scalars(out / "u_0005.vtk")["u"]) == 49


def test_rerun_overwrites_bitwise(tmp_path):
    cfg = write(tmp_path, "[mesh]\nnx = 5\nny = 5\n[time]\nT = 0.3\ndt = 0.1\n")
    blobs = []
    for _ in range(2):
        main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o"), "--stride", "1"])
        blobs.append({p.name: p.read_bytes() for p in (tmp_path / "o").iterdir()})
    assert blobs[0] == blobs[1]


def test_bad_config_exits_nonzero(tmp_path):
    cfg = write(tmp_path, "[conductivity]\nkind = \"pure_plap\"\np = 1.5\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    text = (tmp_path / "o" / "summary.txt").read_text()
    assert "FAIL configuration: line 3" in text and "2 <= p" in text


def test_solver_failure_exits_nonzero(tmp_path):
    cfg = write(
        tmp_path,
        "[conductivity]\np = 3\nsigma0 = {shape = \"affine_clamped\", offset = 1, slope = 1, lower = 1, upper = 3}\n"
        "[boundary]\nu0 = {shape = \"bump\", amplitude = 1}\n"
        "[solver]\npotential_max_iter = 0\n",
    )
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "FAIL simulation completed" in (tmp_path / "o" / "summary.txt").read_text()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "thermistor.cli", "iv-curve", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout


def test_invalid_stride(tmp_path):
    with pytest.raises(SystemExit):
        main(["simulate", "--out", str(tmp_path), "--stride", "0"])
