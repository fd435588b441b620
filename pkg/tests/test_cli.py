"""CLI: artifacts, determinism, exit codes, serialization format."""

import json
import os
import re
import subprocess
import sys

import pytest

from spectral_mirror.cli import main


def run(args, tmp_path, sub="run"):
    out = tmp_path / sub
    return main(args + ["--out", str(out)]), out


def load(out):
    with open(out / "result.json") as fh:
        return json.load(fh)


def test_critical_l_command(tmp_path):
    code, out = run(["critical-l", "--domain",
                     "sector:0.7853981633974483,1"], tmp_path)
    assert code == 0
    payload = load(out)
    assert payload["schema_version"].startswith("spectral-mirror-result/")
    assert abs(payload["critical_L"] - 2 * 3.141592653589793
               / (4 + 3.141592653589793)) < 1e-4


def test_solve_artifacts_and_determinism(tmp_path):
    args = ["solve", "--domain", "rect:1,1", "--N", "6", "--L", "0.2",
            "--nodes", "512"]
    code1, out1 = run(args, tmp_path, "a")
    code2, out2 = run(args, tmp_path, "b")
    assert code1 == code2 == 0
    for name in ("result.json", "density.csv", "boundary.svg"):
        assert (out1 / name).exists()
    p1, p2 = load(out1), load(out2)
    p1.pop("timing_seconds"), p2.pop("timing_seconds")
    assert p1 == p2
    assert (out1 / "density.csv").read_text() == (out2 / "density.csv").read_text()
    assert (out1 / "boundary.svg").read_text() == (out2 / "boundary.svg").read_text()


def test_solve_json_contents(tmp_path):
    code, out = run(["solve", "--domain", "disk:1", "--N", "4", "--L", "0.3",
                     "--nodes", "512"], tmp_path)
    assert code == 0
    payload = load(out)
    assert abs(payload["value_paper_normalized"]
               - payload["value_raw"] * 3.141592653589793 / 2) < 1e-12
    assert len(payload["beta"]) == 4
    assert payload["duality_gap"] >= 0
    # 17-significant-digit round trip: parsing back reproduces the float
    text = (out / "result.json").read_text()
    for tok in re.findall(r'"value_raw": ([^,]+)', text):
        assert float(tok) == payload["value_raw"]


def test_floats_serialized_with_17_digits(tmp_path):
    code, out = run(["closed-form", "--domain", "rect:2,1", "--L", "0.8"],
                    tmp_path)
    assert code == 0
    text = (out / "result.json").read_text()
    assert "0.63661977236758138" in text  # 2/pi at full precision


def test_nogap_trajectory(tmp_path):
    code, out = run(["nogap", "--domain", "disk:1", "--L", "0.3",
                     "--max-iter", "1"], tmp_path)
    assert code == 0
    lines = (out / "trajectory.csv").read_text().strip().splitlines()
    assert lines[0] == "iteration,J,arc_count,epsilon"
    assert len(lines) >= 2
    js = [float(l.split(",")[1]) for l in lines[1:]]
    assert js == sorted(js)
    assert (out / "boundary.svg").read_text().startswith("<svg")


def test_cesaro_command(tmp_path):
    code, out = run(["cesaro", "--domain", "disk:1", "--N", "50",
                     "--nodes", "512"], tmp_path)
    assert code == 0
    payload = load(out)
    assert payload["sup_deviation"] < 1e-2


def test_luke_check_command(tmp_path):
    code, out = run(["luke-check", "--domain", "sector:0.5,1",
                     "--n", "1", "--k", "1"], tmp_path)
    assert code == 0
    payload = load(out)
    assert payload["abs_difference"] == abs(payload["quadrature_value"]
                                            - payload["displayed_value"])


def test_parse_errors_exit_2(tmp_path):
    assert run(["critical-l", "--domain", "pentagon:1"], tmp_path)[0] == 2
    assert run(["nogap", "--domain", "rect:1,1", "--L", "0.3"], tmp_path)[0] == 2
    assert run(["luke-check", "--domain", "disk:1"], tmp_path)[0] == 2


def test_strict_nonconvergence_exit_4(tmp_path):
    code, out = run(["solve", "--domain", "rect:1,1", "--N", "20", "--L",
                     "0.2", "--nodes", "256", "--max-iter", "50",
                     "--strict"], tmp_path)
    assert code == 4
    assert "warning" in load(out)


def test_nonconvergence_without_strict_warns(tmp_path):
    code, out = run(["solve", "--domain", "rect:1,1", "--N", "20", "--L",
                     "0.2", "--nodes", "256", "--max-iter", "50"], tmp_path)
    assert code == 0
    assert "lower bound" in load(out)["warning"]


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRAL_MIRROR_THREADS", "notanumber")
    assert main(["critical-l", "--domain", "disk:1",
                 "--out", str(tmp_path / "x")]) == 2
    monkeypatch.setenv("SPECTRAL_MIRROR_THREADS", "2")
    assert main(["critical-l", "--domain", "disk:1",
                 "--out", str(tmp_path / "y")]) == 0
    assert os.environ["OMP_NUM_THREADS"] == "2"


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "spectral_mirror.cli",
                           "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "solve" in proc.stdout
