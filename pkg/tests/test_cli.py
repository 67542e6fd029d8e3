import json
import math
import shutil
import subprocess

import pytest

from ebk.cli import main


def run_to_file(tmp_path, name, argv):
    out = tmp_path / name
    rc = main(argv + ["--out", str(out)])
    assert rc == 0
    return out.read_bytes()


# --- happy paths ---

def test_spectrum_direct_harmonic_csv(tmp_path):
    data = run_to_file(tmp_path, "direct.csv",
                       ["spectrum-direct", "--profile", "harmonic:1,2",
                        "--m-max", "2"])
    lines = data.decode().splitlines()
    assert lines[0] == "m_1,m_2,E_m,argmax_k,truncation_error_estimate"
    assert len(lines) == 10
    rows = {tuple(line.split(",")[:2]): line.split(",") for line in lines[1:]}
    row = rows[("1", "1")]
    assert float(row[2]) == 3.0
    # the direct route has no enumeration, so the trailing cells stay empty
    assert row[3] == "" and row[4] == ""


def test_billiard_solve_zero_angular_csv(tmp_path):
    data = run_to_file(tmp_path, "solve.csv",
                       ["billiard-solve", "--m", "0", "--n", "1"])
    lines = data.decode().splitlines()
    assert lines[0] == "m,n,F,E,residual"
    m, n, F, E, residual = lines[1].split(",")
    assert (m, n) == ("0", "1")
    assert float(F) == pytest.approx(math.pi, abs=1e-12)
    assert float(E) == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    assert abs(float(residual)) <= 1e-12


def test_billiard_solve_maslov_json(tmp_path):
    data = run_to_file(tmp_path, "solve.json",
                       ["billiard-solve", "--m", "0", "--n", "0", "--maslov",
                        "--format", "json"])
    doc = json.loads(data)
    assert doc["n"] == 0.75
    assert doc["F"] == pytest.approx(0.75 * math.pi, abs=1e-12)


def test_crosscheck_defaults_to_json(capsys):
    rc = main(["billiard-crosscheck", "--m1", "1", "--m2", "2",
               "--k-max", "200"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert sorted(doc) == ["E_toric", "F_ref", "F_route", "difference",
                           "hbar", "k_max", "m1", "m2", "shift",
                           "truncation_error_estimate"]
    assert doc["shift"] == [0.0, 0.0]
    assert doc["k_max"] == 200
    assert abs(doc["difference"]) < 1e-6


def test_crosscheck_csv_flattening(tmp_path):
    data = run_to_file(tmp_path, "cc.csv",
                       ["billiard-crosscheck", "--m1", "1", "--m2", "2",
                        "--k-max", "200", "--format", "csv"])
    header, row = data.decode().splitlines()
    cols = dict(zip(header.split(","), row.split(",")))
    assert cols["shift"] == "0;0"
    assert float(cols["F_route"]) == pytest.approx(float(cols["F_ref"]),
                                                   abs=1e-6)


def test_legendre_dual_sample_count(tmp_path):
    data = run_to_file(tmp_path, "dual.csv",
                       ["legendre-dual", "--profile", "circle",
                        "--samples", "33"])
    lines = data.decode().splitlines()
    assert lines[0] == "param,x_1,x_2"
    assert len(lines) == 34
    t, x, y = (float(tok) for tok in lines[17].split(","))
    # the round profile is self-dual, so samples sit on the unit circle
    assert math.hypot(x, y) == pytest.approx(1.0, abs=1e-6)


def test_reconstruct_writes_report(tmp_path):
    out = tmp_path / "spec.csv"
    report = tmp_path / "report.json"
    rc = main(["spectrum-reconstruct", "--profile", "circle",
               "--k-max", "50", "--m-max", "3",
               "--out", str(out), "--report", str(report)])
    assert rc == 0
    doc = json.loads(report.read_text())
    assert doc["cloud_size"] > 0
    assert doc["hausdorff_vs_reference"] < 1e-3


def test_minmax_certificate_json(tmp_path):
    data = run_to_file(tmp_path, "cert.json",
                       ["minmax-certify", "--profile", "harmonic:1,2",
                        "--k-max", "10", "--energy", "3.5", "--m", "1,1",
                        "--ell-max", "5", "--format", "json"])
    doc = json.loads(data)
    assert doc["sign"] == 1
    assert doc["direction_constant"] == pytest.approx(1.0 / 3.0, rel=1e-12)
    first = doc["records"][0]
    assert first["ell"] == 1
    assert first["value"] == pytest.approx(0.5, rel=1e-12)
    assert first["direction"] == [1, 2]


# --- determinism and file round-trips ---

def test_identical_runs_are_byte_identical(tmp_path):
    argv = ["spectrum-variational", "--profile", "circle",
            "--k-max", "30", "--m-max", "3"]
    assert run_to_file(tmp_path, "a.csv", argv) \
        == run_to_file(tmp_path, "b.csv", argv)


def test_actions_file_matches_profile_route(tmp_path):
    acts = tmp_path / "acts.csv"
    rc = main(["actions", "--profile", "circle", "--k-max", "30",
               "--out", str(acts)])
    assert rc == 0
    via_file = run_to_file(tmp_path, "file.csv",
                           ["spectrum-variational", "--actions", str(acts),
                            "--orientation", "convex", "--m-max", "3"])
    via_profile = run_to_file(tmp_path, "prof.csv",
                              ["spectrum-variational", "--profile", "circle",
                               "--k-max", "30", "--m-max", "3"])
    assert via_file == via_profile


# --- failure modes ---

def test_missing_profile_is_a_config_error(capsys):
    rc = main(["actions", "--k-max", "10"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_profile_is_a_config_error(capsys):
    rc = main(["actions", "--profile", "banana", "--k-max", "10"])
    assert rc == 2
    assert "unknown profile" in capsys.readouterr().err


def test_zero_k_max_is_a_config_error(capsys):
    rc = main(["actions", "--profile", "circle", "--k-max", "0"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_csv_actions_without_orientation(tmp_path, capsys):
    acts = tmp_path / "acts.csv"
    assert main(["actions", "--profile", "circle", "--k-max", "10",
                 "--out", str(acts)]) == 0
    rc = main(["spectrum-variational", "--actions", str(acts),
               "--m-max", "2"])
    assert rc == 2
    assert "--orientation" in capsys.readouterr().err


def test_minmax_on_concave_surface_fails_numerically(capsys):
    rc = main(["minmax-certify", "--profile", "ramos", "--k-max", "10",
               "--energy", "5.0", "--m", "1,1"])
    assert rc == 3
    assert capsys.readouterr().err.startswith("numerical failure:")


# --- installed entry point ---

@pytest.mark.skipif(shutil.which("ebk") is None,
                    reason="console script not on PATH")
def test_console_script_runs():
    proc = subprocess.run(["ebk", "billiard-solve", "--m", "0", "--n", "1",
                           "--format", "json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["F"] == pytest.approx(math.pi, abs=1e-12)
