"""Tests for the setopt command line."""

import json

import pytest

from cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main
from config import get_settings
from services.bench import write_records_csv
from services.traces import read_jsonl
from tests.test_bench import record


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """Point the default output directory at a temporary path."""
    monkeypatch.setenv("SETOPT_OUTPUT_DIR", str(tmp_path / "runs"))
    get_settings.cache_clear()
    yield tmp_path / "runs"
    get_settings.cache_clear()


def test_solve_writes_trace(output_dir, capsys):
    """Test a converging solve exits 0 and writes JSONL, CSV and image points."""
    code = main(["solve", "--problem", "BIQUAD", "--x0", "2,2"])
    assert code == EXIT_OK
    rows = read_jsonl(output_dir / "BIQUAD_trm.jsonl")
    assert rows[-1]["status"] == "Converged"
    assert (output_dir / "BIQUAD_trm.csv").read_text().startswith("k,status,t,omega")
    assert (output_dir / "BIQUAD_trm.points.dat").exists()
    out = capsys.readouterr().out
    assert "status=Converged" in out
    assert "theta=" in out and "critical=" in out


def test_solve_large_epsilon(output_dir):
    """Test a huge stopping tolerance stops at iteration 0."""
    assert main(["solve", "--problem", "BIQUAD", "--x0", "2,2", "--epsilon", "1e9"]) == EXIT_OK
    rows = read_jsonl(output_dir / "BIQUAD_trm.jsonl")
    assert len(rows) == 1
    assert rows[0]["k"] == 0


def test_solve_not_converged(output_dir):
    """Test hitting max_iter exits 2."""
    code = main(["solve", "--problem", "BIQUAD", "--x0", "2,2", "--max-iter", "1", "--epsilon", "1e-12"])
    assert code == EXIT_NOT_CONVERGED


def test_solve_from_config_file(tmp_path, output_dir):
    """Test a JSON run file with random starts writes one trace per start."""
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps({"problem": "BIQUAD", "x0": "random:2", "seed": 4, "solver": "sd", "trace_jsonl": str(tmp_path / "t.jsonl")})
    )
    assert main(["solve", str(config)]) in (EXIT_OK, EXIT_NOT_CONVERGED)
    assert (tmp_path / "t_0.jsonl").exists()
    assert (tmp_path / "t_1.jsonl").exists()


def test_solve_errors(tmp_path, capsys):
    """Test unknown problems, bad x0 and invalid keys exit 1 with a message."""
    assert main(["solve", "--problem", "NOPE", "--x0", "1"]) == EXIT_ERROR
    assert main(["solve", "--problem", "BIQUAD", "--x0", "1,2,3"]) == EXIT_ERROR
    assert main(["solve", "--problem", "GGTZ5-FDSa", "--x0", "0,0", "--cone", "K2"]) == EXIT_ERROR
    assert main(["solve", "--problem", "BIQUAD", "--x0", "2,2", "--solver", "cgm"]) == EXIT_ERROR

    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"problem": "BIQUAD", "x0": [2, 2], "bogus": 1}))
    assert main(["solve", str(config)]) == EXIT_ERROR
    assert "bogus" in capsys.readouterr().err

    assert main(["solve", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_list(capsys):
    """Test list prints every catalog variant."""
    assert main(["list"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) >= 17
    assert any(line.startswith("EX-BQT2-MOD") for line in lines)


def test_check(capsys):
    """Test the derivative check passes on FDSa and rejects FD-only problems."""
    assert main(["check", "GGTZ5-FDSa", "2", "3", "--points", "10"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("PASS")
    assert main(["check", "GGTZ1-ZDT1", "2", "2"]) == EXIT_ERROR
    assert main(["check", "NOPE", "2", "2"]) == EXIT_ERROR


def test_bench_and_profile(tmp_path, output_dir):
    """Test bench writes records and summary, and profile reads them back."""
    config = tmp_path / "bench.json"
    config.write_text(
        json.dumps(
            {
                "problems": [{"name": "GGTZ7-DGO1"}],
                "solvers": ["trm", "sd"],
                "n_inits": 2,
                "seed": 1,
                "trust_region": {"max_iter": 10},
                "steepest_descent": {"max_iter": 10},
            }
        )
    )
    assert main(["bench", str(config)]) == EXIT_OK
    assert (output_dir / "records.csv").exists()
    assert (output_dir / "summary.csv").read_text().startswith("problem,solver,runs")

    assert main(["profile", str(output_dir / "records.csv"), "--all"]) == EXIT_OK
    assert (output_dir / "profile_iterations.json").exists()


def test_profile_synthetic(tmp_path, capsys):
    """Test profile on a hand-written records file."""
    path = write_records_csv([record("P", "A", 1), record("P", "B", 2)], tmp_path / "records.csv")
    out = tmp_path / "profile"
    assert main(["profile", str(path), "--metric", "iterations", "--out", str(out)]) == EXIT_OK
    data = json.loads((out / "profile_iterations.json").read_text())
    assert data["curves"]["A"][0] == 1.0
    assert data["curves"]["B"][0] == 0.0
    assert (out / "profile_iterations_B.dat").exists()
    assert "rho(1)=1.000" in capsys.readouterr().out


def test_profile_missing_file(tmp_path):
    """Test a missing records file exits 1."""
    assert main(["profile", str(tmp_path / "none.csv")]) == EXIT_ERROR


def test_bench_unknown_solver(tmp_path):
    """Test bench validates solver names before running."""
    config = tmp_path / "bench.json"
    config.write_text(json.dumps({"problems": [{"name": "GGTZ7-DGO1"}], "solvers": ["nope"]}))
    assert main(["bench", str(config)]) == EXIT_ERROR


def test_solve_with_cone_file(tmp_path, output_dir):
    """Test --cone accepts a JSON cone spec file and checks it against m."""
    cone_file = tmp_path / "wedge.json"
    cone_file.write_text(json.dumps({"dim": 2, "normals": [[-7, 5], [7, -1]]}))
    code = main(["solve", "--problem", "BIQUAD", "--x0", "2,2", "--cone", str(cone_file), "--max-iter", "20"])
    assert code in (EXIT_OK, EXIT_NOT_CONVERGED)
    assert read_jsonl(output_dir / "BIQUAD_trm.jsonl")

    assert main(["solve", "--problem", "GGTZ5-FDSa", "--x0", "0,0", "--cone", str(cone_file)]) == EXIT_ERROR
    assert main(["solve", "--problem", "BIQUAD", "--x0", "2,2", "--cone", str(tmp_path / "none.json")]) == EXIT_ERROR
    (tmp_path / "flat.json").write_text(json.dumps({"dim": 2, "normals": [[1, 1], [2, 2]]}))
    assert main(["solve", "--problem", "BIQUAD", "--x0", "2,2", "--cone", str(tmp_path / "flat.json")]) == EXIT_ERROR
