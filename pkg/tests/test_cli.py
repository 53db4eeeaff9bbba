import json
import math
import subprocess
import sys

import pytest

BASE = [sys.executable, "-m", "qswitch"]


def run_cli(*args, expect_code=0):
    result = subprocess.run(BASE + list(args), capture_output=True, text=True)
    assert result.returncode == expect_code, result.stderr or result.stdout
    return result


def run_json(*args, expect_code=0):
    return json.loads(run_cli(*args, expect_code=expect_code).stdout)


def test_predict_default_report():
    report = run_json("predict")
    assert report["config"]["command"] == "predict"
    assert abs(report["terms"]["total"] - 1.853553390593) < 1e-9
    assert abs(report["terms"]["term3"] - (0.5 + math.sqrt(2) / 4)) < 1e-9
    assert len(report["table"]) == 16
    assert all(len(row) == 16 for row in report["table"].values())
    assert abs(report["table"]["0000"][0] - 0.426776695297) < 1e-9


def test_predict_zero_visibility():
    report = run_json("predict", "--visibility", "0")
    assert abs(report["terms"]["total"] - 1.25) < 1e-9


def test_predict_csv_has_256_data_rows():
    result = run_cli("predict", "--format", "csv")
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "x1,x2,y,z,a1,a2,b,c,p"
    assert len(lines) == 257


def test_bound_full_enumeration():
    report = run_json("bound")
    assert report["max"] == "7/4"
    assert report["max_float"] == 1.75
    assert report["strategies_scanned"] == 2_097_152
    assert report["optimal_count"] >= 1
    assert report["exemplar"]["terms"] == ["1", "0", "3/4"]
    assert report["exemplar"]["total"] == "7/4"


def test_bound_restricted_class():
    report = run_json("bound", "--restricted")
    assert report["max"] == "5/4"
    assert report["restricted"] is True


def test_simulate_reports_estimates_and_significance(tmp_path):
    counts_path = tmp_path / "counts.csv"
    report = run_json(
        "simulate", "--shots", "200000", "--seed", "7", "--counts-output", str(counts_path)
    )
    total = report["terms"]["total"]
    assert abs(total["value"] - 1.8536) < 0.01
    assert total["std_error"] > 0
    assert report["sigmas_above_bound"] > 20
    lines = counts_path.read_text().strip().splitlines()
    assert lines[0].startswith("# {")
    assert len(lines) == 258  # JSON header + CSV header + 256 rows


def test_simulate_is_byte_identical_for_fixed_seed():
    first = run_cli("simulate", "--shots", "50000", "--seed", "123")
    second = run_cli("simulate", "--shots", "50000", "--seed", "123")
    assert first.stdout == second.stdout
    third = run_cli("simulate", "--shots", "50000", "--seed", "124")
    assert third.stdout != first.stdout


def test_optics_check_passes_and_reports_per_setting():
    report = run_json("optics-check")
    assert report["pass"] is True
    assert report["max_deviation"] < 1e-9
    assert {entry["state"] for entry in report["states"]} == {
        "ideal",
        "werner_v0",
        "werner_v0.5",
        "werner_v1",
    }
    assert all(len(entry["per_setting"]) == 16 for entry in report["states"])


def test_optics_check_fails_with_corrupted_angle():
    result = subprocess.run(
        BASE + ["optics-check", "--corrupt-angle", "0.02"], capture_output=True, text=True
    )
    assert result.returncode == 1
    report = json.loads(result.stdout)
    assert report["pass"] is False
    assert report["max_deviation"] > 1e-4


def test_sweep_contains_threshold_crossing():
    result = run_cli("sweep", "--grid-points", "5")
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "v,gamma,sigma_theta,term1,term2,term3,total"
    rows = [dict(zip(lines[0].split(","), line.split(","))) for line in lines[1:]]
    assert len(rows) >= 25
    crossing = [
        r for r in rows if float(r["gamma"]) == 0.0 and abs(float(r["total"]) - 1.75) < 1e-5
    ]
    assert len(crossing) == 1
    assert abs(float(crossing[0]["v"]) - 0.8284) < 1e-3
    # totals increase with v along the gamma = 0 grid rows
    grid = [float(r["total"]) for r in rows if float(r["gamma"]) == 0.0][:5]
    assert grid == sorted(grid)


def test_spacetime_default_geometry():
    report = run_json("spacetime")
    pairs = {tuple(p["pair"]): p for p in report["pairs"]}
    bob_charlie = pairs[("bob_measurement", "charlie_measurement")]
    assert bob_charlie["spacelike"] is True
    assert abs(bob_charlie["distance_m"] - 20.0) < 1e-6
    assert abs(bob_charlie["light_travel_m"] - 6.7753) < 1e-3
    assert pairs[("source_emission", "bob_measurement")]["spacelike"] is False


def test_spacetime_reads_events_file(tmp_path):
    events = [
        {"name": "left", "t": 0.0, "position": [0.0, 0.0, 0.0]},
        {"name": "right", "t": 0.0, "position": [1.0, 0.0, 0.0]},
    ]
    path = tmp_path / "events.json"
    path.write_text(json.dumps(events))
    report = run_json("spacetime", "--events", str(path))
    assert report["pairs"][0]["spacelike"] is True


def test_output_file_and_env_dir(tmp_path, monkeypatch):
    result = subprocess.run(
        BASE + ["predict", "--output", "report.json"],
        capture_output=True,
        text=True,
        env={"QSWITCH_OUTPUT_DIR": str(tmp_path), "PATH": "/usr/bin:/bin"},
    )
    assert result.returncode == 0
    written = tmp_path / "report.json"
    assert written.exists()
    assert abs(json.loads(written.read_text())["terms"]["total"] - 1.8536) < 1e-3


def test_invalid_flag_produces_machine_readable_error():
    result = subprocess.run(
        BASE + ["predict", "--visibility", "1.5"], capture_output=True, text=True
    )
    assert result.returncode == 1
    error = json.loads(result.stderr)
    assert error["error"]["type"] == "ValueError"
    assert "visibility" in error["error"]["message"]
