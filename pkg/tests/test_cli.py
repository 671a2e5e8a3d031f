import json
from pathlib import Path

import numpy as np
import pytest

from conftest import diagonal_matrix
from sublinfrechet.freespace import save_matrix
from sublinfrechet.geometry import Curve, save_curve
from sublinfrechet.main import EXIT_ERROR, EXIT_NO, EXIT_YES, run


def _output(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def diag_file(tmp_path):
    return str(save_matrix(diagonal_matrix(6), tmp_path / "diag.txt"))


@pytest.fixture
def line_pair(tmp_path):
    P = save_curve(Curve.from_points([(0, 0), (20, 0)]), tmp_path / "P.json")
    Q = save_curve(Curve.from_points([(0, 0), (5, 0), (20, 0)]), tmp_path / "Q.csv")
    return str(P), str(Q)


def test_exact_on_a_matrix(diag_file, capsys):
    assert run(["exact", "--matrix", diag_file]) == EXIT_YES
    body = _output(capsys)
    assert body["shape"] == [6, 6]
    assert body["min_cost_coupling"] == 0
    assert body["barrier_columns"] == body["barrier_rows"] == 0


def test_exact_on_curves(tmp_path, capsys):
    P = save_curve(Curve.from_points([(0, 0), (1, 0), (2, 0)]), tmp_path / "P.json")
    Q = save_curve(Curve.from_points([(0, 1), (1, 1), (2, 1)]), tmp_path / "Q.json")
    assert run(["exact", str(P), str(Q), "--delta", "0.5"]) == EXIT_YES
    body = _output(capsys)
    assert body["discrete_frechet"] == 1.0
    assert body["min_cost_coupling"] == 3
    assert body["barrier_columns"] == 3


def test_hausdorff_run(diag_file, capsys):
    code = run(["test", "--algo", "hausdorff", "--matrix", diag_file, "--epsilon", "0.5", "--seed", "1"])
    assert code == EXIT_YES
    body = _output(capsys)
    assert body["answer"] == "yes"
    assert body["queries_used"] == 8


def test_rejection_exits_with_one(tmp_path, capsys):
    M = diagonal_matrix(6)
    M[0, 0] = 1
    path = str(save_matrix(M, tmp_path / "m.txt"))
    assert run(["test", "--algo", "frechet1", "--matrix", path, "--t", "1", "--epsilon", "0.5"]) == EXIT_NO
    body = _output(capsys)
    assert body["witness"] == {"i": 1, "j": 1, "kind": "corner_one"}


def test_continuous_run(line_pair, capsys):
    P, Q = line_pair
    args = ["test", "--algo", "continuous", P, Q, "--delta", "4", "--eps-prime", "1", "--epsilon", "0.5", "--t", "1"]
    assert run(args) == EXIT_YES
    assert _output(capsys)["trace"]["n_a"] == 21


def test_bad_input_exits_with_two(tmp_path, diag_file, line_pair, capsys):
    assert run(["test", "--algo", "frechet1"]) == EXIT_ERROR
    assert run(["exact", str(tmp_path / "nope.json"), str(tmp_path / "nope.json")]) == EXIT_ERROR
    assert run(["test", "--algo", "reduced", "--matrix", diag_file]) == EXIT_ERROR
    P, Q = line_pair
    assert run(["test", "--algo", "continuous", P, Q, "--delta", "4"]) == EXIT_ERROR
    assert capsys.readouterr().out == ""


def test_gen_writes_a_certified_pair(tmp_path, capsys):
    prefix = tmp_path / "pair"
    assert run(["gen", "--recipe", "perturb", "--n", "32", "--seed", "3", "--out", str(prefix)]) == EXIT_YES
    body = _output(capsys)
    assert body["kind"] == "yes"
    assert body["seed"] == 3
    assert run(["exact", body["P"], body["Q"]]) == EXIT_YES
    assert _output(capsys)["min_cost_coupling"] == 0


def test_gen_defaults_to_the_data_dir(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("SUBLINFRECHET_DATA_DIR", str(tmp_path))
    assert run(["gen", "--recipe", "straight", "--n", "16", "--seed", "4"]) == EXIT_YES
    body = _output(capsys)
    assert body["P"] == str(tmp_path / "curves" / "straight_4_P.json")
    assert np.array_equal(
        np.array(json.loads(Path(body["P"]).read_text(encoding="utf-8"))["points"]),
        np.array(json.loads(Path(body["Q"]).read_text(encoding="utf-8"))["points"]),
    )


def test_bench_writes_a_report(tmp_path, capsys):
    report = tmp_path / "r.jsonl"
    args = ["bench", "--algo", "hausdorff", "--recipe", "hausdorff_far", "--n", "32", "--eps", "0.2",
            "--trials", "10", "--seed", "1", "--report", str(report)]
    assert run(args) == EXIT_YES
    aggregate = _output(capsys)
    assert aggregate["trials"] == 10
    assert len(report.read_text(encoding="utf-8").splitlines()) == 11


def test_bench_sweep(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    args = ["bench", "--algo", "hausdorff", "--recipe", "hausdorff_far", "--n", "32", "--trials", "4",
            "--seed", "1", "--axis", "eps", "--values", "0.25", "0.5", "--out", str(out)]
    assert run(args) == EXIT_YES
    assert out.read_text(encoding="utf-8").splitlines()[0] == "axis_value,median_q,p90_q,no_rate,wilson_lb,fitted_ratio"
    assert capsys.readouterr().out == ""


def test_verify_exit_codes(capsys):
    assert run(["verify", "--instances", "5", "--seed", "2", "--only", "subsample_spacing"]) == EXIT_YES
    assert _output(capsys)["passed"]
    assert run(["verify", "--instances", "5", "--seed", "2", "--mutant", "--only", "layers_bracket"]) == EXIT_NO
    assert not _output(capsys)["passed"]


def test_malformed_seed_setting_exits_with_two(monkeypatch, capsys):
    monkeypatch.setenv("SEED", "twelve")
    assert run(["verify", "--instances", "1", "--only", "subsample_spacing"]) == EXIT_ERROR
    assert "SEED must be an integer" in capsys.readouterr().err
