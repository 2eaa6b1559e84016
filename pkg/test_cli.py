#!/usr/bin/env python3
"""
Command-line tests: outputs, exit-code contract, manifests and determinism.
"""

import io
import json

import pandas as pd
import pytest

from src.cli import EXIT_INPUT, EXIT_IO, EXIT_OK, EXIT_RESOURCE, EXIT_VERIFY_FAILED, run
from src.problem_model import serialize_instance, widen_instance
from src.settings import FIXTURE_A_PATH

FIXTURE = str(FIXTURE_A_PATH)


def _manifest(stderr: str) -> dict:
    return json.loads(stderr.strip().splitlines()[-1])


@pytest.fixture
def wide_instance_path(tmp_path, fixture_a):
    path = tmp_path / "five_hours.json"
    path.write_text(serialize_instance(widen_instance(fixture_a, 5)), encoding="utf-8")
    return str(path)


# ------------------------------------------------------------------------------------
# transform
# ------------------------------------------------------------------------------------
def test_transform_ising_to_stdout(capsys):
    assert run(["transform", FIXTURE, "--emit", "ising"]) == EXIT_OK
    out, err = capsys.readouterr()
    document = json.loads(out)
    assert document["h"][0] == 79
    assert document["offset"] == 2019.5
    assert "12 variables, 5 constraints" in err
    manifest = _manifest(err)
    assert manifest["command"] == "transform"
    assert manifest["instance"] == FIXTURE
    assert manifest["exit_code"] == 0


def test_transform_ilp_to_file(capsys, tmp_path):
    target = tmp_path / "out" / "ilp.json"
    assert run(["transform", FIXTURE, "--emit", "ilp", "--out", str(target)]) == EXIT_OK
    out, err = capsys.readouterr()
    assert "12 variables, 5 constraints" in out
    assert json.loads(target.read_text())["num_constraints"] == 5
    assert _manifest(err)["outputs"] == [str(target)]


def test_transform_all_and_hamiltonian(capsys):
    assert run(["transform", FIXTURE, "--emit", "all"]) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert set(document) == {"ilp", "qubo", "ising"}
    assert document["qubo"]["penalty"] == 202

    assert run(["transform", FIXTURE, "--emit", "hamiltonian"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("79·Z_1 + 80·Z_2")
    assert out.rstrip().endswith("+ 2019.5")


def test_missing_tariff_entry_exits_with_validation_code(capsys, tmp_path):
    document = json.loads(FIXTURE_A_PATH.read_text())
    document["tariff"] = [22, 21]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(document))
    target = tmp_path / "never.json"
    assert run(["transform", str(path), "--out", str(target)]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "tariff" in err
    assert _manifest(err)["exit_code"] == EXIT_INPUT
    assert not target.exists()
    assert list(tmp_path.iterdir()) == [path]


def test_malformed_document_exits_with_validation_code(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"hours": 3,')
    assert run(["enumerate", str(path)]) == EXIT_INPUT
    assert "line 1" in capsys.readouterr().err


def test_missing_file_exits_with_io_code(capsys, tmp_path):
    assert run(["transform", str(tmp_path / "absent.json")]) == EXIT_IO
    assert "I/O error" in capsys.readouterr().err


# ------------------------------------------------------------------------------------
# solve / enumerate
# ------------------------------------------------------------------------------------
def test_solve_exact_json(capsys):
    assert run(["solve", FIXTURE, "--method", "exact", "--format", "json"]) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["optimum"]["bits"] == "110010100011"
    assert document["optimum"]["energy"] == pytest.approx(107)
    assert document["solutions"][0] == {"rank": 1, "bits": "110010", "cost": 107, "cost_eur": 1.07}


def test_solve_exact_table_shows_cents_and_euros(capsys):
    assert run(["solve", FIXTURE, "--method", "exact"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "107 cents (1.07 €)" in out
    assert "x_1^1" in out


def test_solve_qaoa_is_deterministic(capsys):
    argv = ["solve", FIXTURE, "--reps", "1", "--restarts", "1", "--max-evaluations", "40",
            "--shots", "256", "--seed", "7", "--format", "json"]
    assert run(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert run(argv) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    document = json.loads(first)
    assert document["exact_optimum_cost"] == 107
    assert document["config"]["seed"] == 7
    assert sum(s["count"] for s in document["samples"]) == 256


def test_solve_qaoa_csv(capsys):
    argv = ["solve", FIXTURE, "--max-evaluations", "20", "--shots", "64", "--format", "csv"]
    assert run(argv) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out), dtype={"bits": str})
    assert frame["count"].sum() == 64
    assert (frame["bits"].str.len() == 12).all()


def test_solve_over_cap_exits_with_resource_code(capsys, wide_instance_path):
    assert run(["solve", wide_instance_path, "--max-qubits", "16"]) == EXIT_RESOURCE
    err = capsys.readouterr().err
    assert "cap of 16" in err
    assert _manifest(err)["config"]["max_qubits"] == 16


def test_enumerate_csv(capsys):
    assert run(["enumerate", FIXTURE, "--format", "csv"]) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert len(frame) == 9
    assert frame["cost"].tolist() == [107, 108, 110, 111, 112, 113, 114, 114, 116]
    assert frame.iloc[-1][["x_1^1", "x_1^2", "x_1^3", "x_2^1", "x_2^2", "x_2^3"]].tolist() == [1, 0, 1, 0, 0, 1]


def test_enumerate_oversized_exits_with_resource_code(capsys, tmp_path, fixture_a):
    path = tmp_path / "huge.json"
    path.write_text(serialize_instance(widen_instance(fixture_a, 16)))
    assert run(["enumerate", str(path)]) == EXIT_RESOURCE


# ------------------------------------------------------------------------------------
# bench / verify
# ------------------------------------------------------------------------------------
def test_bench_reports_counts_and_cap(capsys):
    argv = ["bench", "--hours", "3,4,5", "--reps", "1", "--max-qubits", "16",
            "--max-evaluations", "5", "--shots", "64", "--format", "json"]
    assert run(argv) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert [r["qubits"] for r in rows] == [12, 16, 20]
    assert [(r["load_vars"], r["slack_vars"]) for r in rows] == [(6, 6), (8, 8), (10, 10)]
    assert [r["status"] for r in rows] == ["ok", "ok", "cap"]
    assert rows[2]["seconds"] is None
    assert rows[0]["seconds"] >= 0


def test_verify_exit_codes(capsys):
    assert run(["verify", FIXTURE]) == EXIT_OK
    assert "All checks passed" in capsys.readouterr().out
    assert run(["verify", FIXTURE, "--penalty", "0", "--format", "json"]) == EXIT_VERIFY_FAILED
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False


def test_manifest_file(capsys, tmp_path):
    manifest_path = tmp_path / "run.json"
    assert run(["enumerate", FIXTURE, "--manifest", str(manifest_path)]) == EXIT_OK
    manifest = json.loads(manifest_path.read_text())
    assert manifest["command"] == "enumerate"
    assert set(manifest["timings_s"]) == {"load", "enumerate"}
    assert "\"command\"" not in capsys.readouterr().err


def test_verify_table_names_failed_checks(capsys):
    assert run(["verify", FIXTURE, "--penalty", "0"]) == EXIT_VERIFY_FAILED
    out = capsys.readouterr().out
    assert "❌ Verification failed: penalty_separation, optimum_decoding" in out
    assert "witness: 000000000000" in out
