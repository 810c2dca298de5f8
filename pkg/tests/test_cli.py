import csv
import json

import numpy as np
import pytest

from lpfix.cli import main
from lpfix.grid import ViolationCertificate, verify_violation_certificate


@pytest.fixture()
def affine_instance(tmp_path):
    doc = {"d": 2, "p": "1", "lambda": 0.5, "epsilon": 0.01,
           "map": {"type": "affine",
                   "A": [0.5, 0.0, 0.0, 0.5], "t": [0.25, 0.25]}}
    path = tmp_path / "affine.json"
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture()
def demo_instance(tmp_path):
    doc = {"d": 1, "p": "1", "lambda": 0.5, "epsilon": 0.1,
           "map": {"type": "non_contraction_demo", "b": 1}}
    path = tmp_path / "demo.json"
    path.write_text(json.dumps(doc))
    return path


def test_solve_exit_zero_and_artifacts(tmp_path, affine_instance, capsys):
    out_csv = tmp_path / "trace.csv"
    out_json = tmp_path / "summary.json"
    code = main(["solve", "--instance", str(affine_instance),
                 "--cloud", "4096", "--seed", "7",
                 "--out-csv", str(out_csv), "--out-json", str(out_json)])
    assert code == 0
    summary = json.loads(out_json.read_text())
    assert summary["outcome"] == "found"
    assert summary["residual"] <= 0.01
    rows = list(csv.DictReader(out_csv.read_text().splitlines()))
    assert len(rows) == summary["queries_used"] - summary["banach_queries"]
    for row in rows:
        assert {"iter", "query_0", "query_1", "residual", "alive_fraction",
                "achieved_rho", "discard_fraction", "cum_queries"} <= set(row)
        float(row["residual"])

    # written values round-trip to the exact in-memory trace
    from lpfix.oracles import make_affine_clamped
    from lpfix.solver import SolveParams, solve_continuous
    inst = make_affine_clamped(0.5 * np.eye(2), np.array([0.25, 0.25]), "1")
    rep = solve_continuous(inst, SolveParams(d=2, p="1", epsilon=0.01, lam=0.5,
                                             n_cloud=4096, seed=7))
    assert summary["residual"] == rep.residual
    assert summary["queries_used"] == rep.queries_used
    for row, rec in zip(rows, rep.trace):
        assert float(row["residual"]) == rec.residual
        assert float(row["query_0"]) == rec.query[0]
        assert float(row["achieved_rho"]) == rec.achieved_rho


def test_solve_outputs_bit_identical(tmp_path, affine_instance):
    outs = []
    for name in ("a", "b"):
        out_csv = tmp_path / f"{name}.csv"
        out_json = tmp_path / f"{name}.json"
        code = main(["solve", "--instance", str(affine_instance),
                     "--cloud", "4096", "--seed", "11",
                     "--out-csv", str(out_csv), "--out-json", str(out_json)])
        assert code == 0
        outs.append((out_csv.read_text(), out_json.read_text()))
    assert outs[0] == outs[1]


def test_solve_malformed_p_exits_one(tmp_path, affine_instance, capsys):
    doc = json.loads(affine_instance.read_text())
    doc["p"] = "banana"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code = main(["solve", "--instance", str(bad)])
    assert code == 1


def test_solve_budget_exit_three(affine_instance, capsys):
    code = main(["solve", "--instance", str(affine_instance),
                 "--cloud", "4096", "--epsilon", "1e-9",
                 "--max-queries", "1", "--seed", "3"])
    assert code == 3
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["outcome"] == "budget_exhausted"
    assert out["queries_used"] == 1


def test_grid_solve_affine_exit_zero(tmp_path, affine_instance, capsys):
    code = main(["grid-solve", "--instance", str(affine_instance),
                 "--epsilon", "0.05", "--seed", "2",
                 "--out-json", str(tmp_path / "g.json")])
    assert code == 0
    summary = json.loads((tmp_path / "g.json").read_text())
    assert summary["outcome"] == "found"


def test_grid_solve_demo_exit_two_with_certificate(tmp_path, demo_instance, capsys):
    cert_path = tmp_path / "cert.json"
    code = main(["grid-solve", "--instance", str(demo_instance),
                 "--out-json", str(cert_path)])
    assert code == 2
    doc = json.loads(cert_path.read_text())
    assert len(doc) == 2
    cert = ViolationCertificate.from_json(doc, 1, 1)
    assert verify_violation_certificate(cert, 1, 1)


def test_grid_solve_coarse_bits_exit_one(affine_instance, capsys):
    code = main(["grid-solve", "--instance", str(affine_instance),
                 "--bits", "2"])
    assert code == 1


def test_missing_instance_exit_one(capsys):
    assert main(["solve"]) == 1


def test_bench_rows_and_determinism(tmp_path, capsys):
    args = ["bench", "--d-list", "2", "--p-list", "1,inf",
            "--eps-list", "0.1", "--lambda-list", "0.5",
            "--instances", "2", "--cloud", "2048", "--seed", "5"]
    a_path = tmp_path / "a.csv"
    b_path = tmp_path / "b.csv"
    assert main(args + ["--out-csv", str(a_path)]) == 0
    assert main(args + ["--out-csv", str(b_path), "--workers", "2"]) == 0
    a = a_path.read_text()
    assert a == b_path.read_text()
    rows = list(csv.DictReader(a.splitlines()))
    assert len(rows) == 4          # 1 d x 2 p x 1 eps x 1 lambda x 2 instances
    for row in rows:
        assert row["outcome"] == "found"
        assert int(row["queries_used"]) <= int(row["bound"])


def test_bench_cartesian_row_count(tmp_path, capsys):
    # 2 d x 4 p x 2 eps x 2 lambda x 1 instance = 32 rows
    out = tmp_path / "sweep.csv"
    main(["bench", "--d-list", "2,3", "--p-list", "1,2,3,inf",
          "--eps-list", "1e-1,3e-2", "--lambda-list", "0.3,0.5",
          "--instances", "1", "--cloud", "2048", "--seed", "1",
          "--out-csv", str(out)])
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 32
    assert all(not row["outcome"].startswith("error") for row in rows)


def test_bench_queries_roughly_linear_in_log_eps(tmp_path, capsys):
    out = tmp_path / "lin.csv"
    main(["bench", "--d-list", "2", "--p-list", "1",
          "--eps-list", "1e-1,1e-2", "--lambda-list", "0.5",
          "--instances", "3", "--cloud", "16384", "--seed", "2",
          "--out-csv", str(out)])
    rows = list(csv.DictReader(out.read_text().splitlines()))
    by_eps = {}
    for row in rows:
        by_eps.setdefault(float(row["epsilon"]), []).append(int(row["queries_used"]))
    coarse = np.mean(by_eps[1e-1])
    fine = np.mean(by_eps[1e-2])
    assert fine <= 2 * coarse + 16


def test_grid_solve_writes_trace_csv(tmp_path, affine_instance):
    out_csv = tmp_path / "gtrace.csv"
    code = main(["grid-solve", "--instance", str(affine_instance),
                 "--epsilon", "0.05", "--seed", "2",
                 "--out-csv", str(out_csv)])
    assert code == 0
    rows = list(csv.DictReader(out_csv.read_text().splitlines()))
    assert rows and "alive_after" in rows[0]


def test_seed_env_fallback(tmp_path, affine_instance, monkeypatch, capsys):
    out_a = tmp_path / "a.json"
    monkeypatch.setenv("LPFIX_SEED", "23")
    code = main(["solve", "--instance", str(affine_instance),
                 "--cloud", "2048", "--out-json", str(out_a)])
    assert code == 0
    assert json.loads(out_a.read_text())["seed"] == 23
