import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cloud_moments.moment_core import load
from cloud_moments.scripts.cli import run

from tests.cloud_moments.helpers import fixture_path


def _fixture(name: str) -> str:
    return str(fixture_path(name))


def _last_error(stderr: str) -> dict:
    return json.loads(stderr.strip().splitlines()[-1])


# ---------------------------------------------------------------------------
# Moment tables
# ---------------------------------------------------------------------------


def test_gen_moments_is_deterministic(tmp_path):
    first, second = tmp_path / "a" / "m.json", tmp_path / "b.json"
    args = ["gen-moments", "--measure", _fixture("disk.json"), "--degree", "4", "--prec", "128"]
    assert run([*args, "--out", str(first)]) == 0
    assert run([*args, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    table = load(first.read_bytes())
    assert table.degree == 4
    assert table.mass_unit == "lebesgue"


def test_validate_prints_report(capsys):
    assert run(["validate", "--moments", _fixture("disk_d6.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["valid"] is True
    assert report["degree"] == 6


def test_indefinite_table_exits_with_input_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"degree": 1, "entries": [[[1, 0], [2, 0]], [[2, 0], [1, 0]]]}')
    assert run(["validate", "--moments", str(path)]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    error = _last_error(captured.err)
    assert error["error"] == "NotPSDError"
    assert error["exit_code"] == 2


def test_singular_measure_exits_with_numerical_error(tmp_path, capsys):
    path = tmp_path / "atoms.json"
    path.write_text('{"kind": "atoms", "atoms": [[[0, 0], 1.0], [[1, 0], 1.0]]}')
    assert run(["orthopoly", "--measure", str(path), "--nmax", "3"]) == 3
    assert _last_error(capsys.readouterr().err)["error"] == "NumericallySingularError"


def test_missing_file_is_reported(tmp_path, capsys):
    assert run(["validate", "--moments", str(tmp_path / "nowhere.json")]) == 2
    assert _last_error(capsys.readouterr().err)["error"] == "InvalidArgumentError"


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def test_unknown_flag_exits_with_usage_error():
    assert run(["validate", "--bogus"]) == 2


def test_missing_subcommand_exits_with_usage_error():
    assert run([]) == 2


def test_cutoff_order_is_validated(capsys):
    assert run(["cloud-moments", "--measure", _fixture("disk.json"), "--n", "20", "--N", "10"]) == 2
    error = _last_error(capsys.readouterr().err)
    assert error["error"] == "InvalidArgumentError"
    assert "n < N" in error["message"]


def test_table_too_small_for_cutoff(capsys):
    args = ["cloud-moments", "--moments", _fixture("disk_d6.json"), "--n", "2", "--N", "5"]
    assert run(args) == 2
    assert _last_error(capsys.readouterr().err)["error"] == "DegreeTooHighError"


# ---------------------------------------------------------------------------
# Cloud moments and reconstruction
# ---------------------------------------------------------------------------


def test_disk_cloud_moment_within_bound(capsys):
    args = ["cloud-moments", "--measure", _fixture("disk.json"), "--dmax", "1", "--n", "8", "--N", "20"]
    assert run([*args, "--prec", "128"]) == 0
    output = json.loads(capsys.readouterr().out)
    assert "error" not in output
    re, im = output["c"][0][0]
    assert re == pytest.approx(0.9)
    assert output["a"][0][0][0] == pytest.approx(0.9 * math.pi)
    bound = next(b["bound"] for b in output["error_bounds"] if (b["p"], b["q"]) == (0, 0))
    assert abs(complex(re, im) - 1) <= bound


def test_reconstruct_from_cloud_moment_file(tmp_path, capsys):
    # area moments of the disk |z - 1/2| <= 1
    path = tmp_path / "cloud.json"
    a = [[math.pi, math.pi / 2], [math.pi / 2, 0.75 * math.pi]]
    path.write_text(json.dumps({"a": [[[x, 0.0] for x in row] for row in a]}))
    assert run(["reconstruct", "--cloud-moments", str(path), "--d", "1"]) == 0
    output = json.loads(capsys.readouterr().out)
    assert output["is_quadrature"] is True
    assert output["nodes"][0] == pytest.approx([0.5, 0.0], abs=1e-8)
    assert output["P"][1] == pytest.approx([1.0, 0.0])


def test_reconstruct_checks_the_series_outside_the_support(tmp_path, capsys):
    path = tmp_path / "cloud.json"
    a = [[math.pi, math.pi / 2], [math.pi / 2, 0.75 * math.pi]]
    path.write_text(json.dumps({"a": [[[x, 0.0] for x in row] for row in a]}))
    args = ["reconstruct", "--cloud-moments", str(path), "--measure", _fixture("shifted_disk.json"), "--d", "1"]
    assert run([*args, "--prec", "128"]) == 0
    output = json.loads(capsys.readouterr().out)
    # only the a_kl with k, l <= 1 enter the truncated series
    assert 0 < output["series_defect"] < 0.05


def test_cloud_moment_file_without_a(tmp_path, capsys):
    path = tmp_path / "cloud.json"
    path.write_text('{"n": 8}')
    assert run(["reconstruct", "--cloud-moments", str(path)]) == 2
    assert _last_error(capsys.readouterr().err)["error"] == "ParseError"


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def test_kernel_grid_csv(capsys):
    args = ["kernel-grid", "--measure", _fixture("disk.json"), "--nmax", "4", "--resolution", "3", "--prec", "128"]
    assert run(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,y,K"
    assert len(lines) == 1 + 9
    x, y, value = map(float, lines[5].split(","))
    # centre of the grid: K_4(0, 0) = 1/π
    assert (x, y) == (0.0, 0.0)
    assert value == pytest.approx(1 / math.pi)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def test_help_runs_as_module():
    root = Path(__file__).resolve().parents[2]
    env = {**os.environ, "PYTHONPATH": str(root / "src")}
    result = subprocess.run(
        [sys.executable, "-m", "cloud_moments.scripts.cli", "--help"],
        capture_output=True,
        text=True,
        env=env,
        check=False,
    )
    assert result.returncode == 0
    assert "cloud-moments" in result.stdout
