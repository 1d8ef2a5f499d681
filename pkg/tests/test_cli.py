import json

import numpy as np
import pytest

from fullrand import SimSpec, estimate_one_way_fr, gen_one_way
from fullrand.cli import main
from fullrand.report import flatten


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    rows = {}
    for line in text.splitlines():
        if line.strip():
            k, v = line.split(None, 1)
            rows[k] = v.strip()
    return rows


@pytest.fixture
def one_way_csv(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, _, _ = run(capsys, "simulate", "--model", "one-way", "--r", 100, "--seed", 7,
                     "--out", path)
    assert code == 0
    return path


def test_simulate_estimate_pipeline(one_way_csv, capsys):
    code, out, _ = run(capsys, "estimate", "--model", "one-way", "--input", one_way_csv)
    assert code == 0
    rows = table(out)
    for name in ("mu", "sigma_a2", "sigma_e2", "nu1", "nu2"):
        assert f"estimates.{name}" in rows
    # the CSV route gives the in-memory answer
    est = estimate_one_way_fr(gen_one_way(SimSpec.one_way(r=100, seed=7)))
    assert float(rows["estimates.sigma_a2"]) == pytest.approx(est.sigma_a2, rel=1e-9)


def test_chunked_output_independent_of_workers(one_way_csv, capsys):
    base = ["estimate", "--model", "one-way", "--input", one_way_csv, "--chunks", 4]
    c1, out1, _ = run(capsys, *base, "--workers", 1)
    c4, out4, _ = run(capsys, *base, "--workers", 4)
    assert c1 == c4 == 0 and out1 == out4
    assert "std_errors.sigma_a2" in table(out1)


def test_json_reproduces_table(one_way_csv, capsys):
    base = ["estimate", "--model", "one-way", "--input", one_way_csv, "--chunks", 3]
    _, text, _ = run(capsys, *base)
    _, js, _ = run(capsys, *base, "--json")
    doc = json.loads(js)
    assert dict(flatten(doc)) == table(text)
    assert all(v >= 0 for v in doc["std_errors"].values())


def test_crossed_with_overlap_diagnostic(tmp_path, capsys):
    p = tmp_path / "ratings.csv"
    p.write_text("row,col,y\nu1,m1,4\nu1,m2,3\nu2,m2,5\nu2,m3,2\nu3,m1,1\nu3,m2,4\nu3,m3,3\n")
    code, out, _ = run(capsys, "estimate", "--model", "crossed", "--input", p,
                       "--diagnose-overlap", "--json")
    assert code == 0
    doc = json.loads(out)
    # column sets {1,2}, {2,3}, {1,2,3}
    assert doc["overlap"]["support"] == pytest.approx({"1": 1 / 3, "2": 2 / 3})
    assert doc["overlap"]["mean_t"] == pytest.approx(5 / 3)
    assert set(doc["row_cov"]) == {"model_cov", "empirical_cov"}


def test_simulated_crossed_round_trip(tmp_path, capsys):
    p = tmp_path / "c.csv"
    assert run(capsys, "simulate", "--model", "crossed", "--r", 80, "--c", 60,
               "--density", 0.2, "--out", p)[0] == 0
    code, out, _ = run(capsys, "estimate", "--model", "crossed", "--input", p, "--chunks", 2,
                       "--json")
    assert code == 0 and json.loads(out)["diagnostics"]["chunk_plan"]["unit"] == "arrival"


@pytest.mark.parametrize("model", ["famsize", "regression"])
def test_other_models(tmp_path, capsys, model):
    p = tmp_path / "f.csv"
    assert run(capsys, "simulate", "--model", model, "--r", 400, "--out", p)[0] == 0
    code, out, _ = run(capsys, "estimate", "--model", model, "--input", p, "--json")
    assert code == 0
    doc = json.loads(out)
    if model == "famsize":
        assert doc["diagnostics"]["converged"] is True
    else:
        assert "gamma2" in doc["estimates"]


def test_config_round_trip(tmp_path, capsys):
    cfg, a, b = tmp_path / "spec.json", tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "simulate", "--model", "one-way", "--r", 50, "--alpha-dist", "gamma",
        "--out", a, "--save-config", cfg)
    run(capsys, "simulate", "--config", cfg, "--out", b)
    assert a.read_text() == b.read_text()


def test_compare(one_way_csv, capsys):
    code, out, _ = run(capsys, "compare", "--input", one_way_csv, "--json")
    doc = json.loads(out)
    assert code == 0 and set(doc) >= {"random_counts", "fixed_counts", "difference"}


def test_bench_reports_timings(capsys):
    code, out, _ = run(capsys, "bench", "--model", "one-way", "--r", 400, "--repeat", 1,
                       "--chunks", 2, "--workers", 2, "--json")
    doc = json.loads(out)
    assert code == 0 and doc["identical_results"] is True
    assert set(doc["seconds"]) == {"full", "alchemy_serial", "alchemy_parallel"}


def test_clamp_example_exit_zero(tmp_path, capsys):
    p = tmp_path / "clamp.csv"
    p.write_text("group,y\n1,0\n1,0\n2,2\n2,2\n")
    code, out, _ = run(capsys, "estimate", "--model", "one-way", "--input", p, "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["clamped"]["sigma_e2"] is True
    assert doc["estimates"]["sigma_e2"] == 0.0
    assert doc["estimates"]["sigma_a2"] == pytest.approx(4 / 3)


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "estimate", "--model", "nope", "--input", "x")[0] == 2
    assert run(capsys, "estimate", "--model", "one-way")[0] == 2
    assert run(capsys, "estimate", "--model", "one-way", "--input", tmp_path / "missing.csv")[0] == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("group,y\na,1\na,x\n")
    code, _, err = run(capsys, "estimate", "--model", "one-way", "--input", bad)
    assert code == 1 and "line 3" in err
    single = tmp_path / "s.csv"
    single.write_text("group,y\na,1\nb,2\n")
    assert run(capsys, "estimate", "--model", "one-way", "--input", single)[0] == 1
    assert run(capsys, "estimate", "--model", "one-way", "--input", single, "--chunks", 0)[0] == 2
