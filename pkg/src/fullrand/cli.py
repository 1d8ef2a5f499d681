"""Command-line interface: ``simulate``, ``estimate``, ``compare``, ``bench``.

Exit codes: 0 success, 1 data or estimation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .alchemy import alchemy_estimate, make_chunks, make_stream_chunks
from .data import SparseRatings
from .errors import DataError
from .estimators import (SolverOptions, estimate_crossed, estimate_famsize,
                         estimate_one_way_fixed, estimate_one_way_fr, estimate_with_regressors,
                         overlap_distribution, row_cov_diagnostic)
from .io import (csv_header, read_grouped_csv, read_ratings_csv, write_grouped_csv,
                 write_ratings_csv)
from .report import alchemy_report, estimate_report, render_json, render_table
from .simgen import SimSpec, generate, parse_count

MODELS = ("one-way", "famsize", "regression", "crossed")
_SPEC_MODEL = {"one-way": "one_way", "famsize": "famsize", "regression": "regression",
               "crossed": "crossed"}


def _emit(report: dict, as_json: bool, out=None):
    out = out or sys.stdout
    out.write((render_json(report) if as_json else render_table(report)) + "\n")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


# simulate --------------------------------------------------------------
def _sim_spec(a) -> SimSpec:
    if a.config:
        with open(a.config, encoding="utf-8") as fh:
            spec = SimSpec.loads(fh.read())
        return spec.with_seed(a.seed) if a.seed is not None else spec
    model = a.model
    kw = {}
    for name in ("mu", "sigma_a2", "sigma_b2", "sigma_e2", "c1", "c2", "r", "c", "density"):
        v = getattr(a, name)
        if v is not None:
            kw[name] = v
    if a.seed is not None:
        kw["seed"] = a.seed
    if a.alpha_dist:
        kw["alpha"] = a.alpha_dist
    if a.eps_dist:
        kw["eps"] = a.eps_dist
    kw["gamma_shape"] = a.gamma_shape
    if model == "crossed":
        kw.pop("c1", None), kw.pop("c2", None)
        if a.beta_dist:
            kw["beta"] = a.beta_dist
        kw["mode"] = a.mode
        return SimSpec.crossed(**kw)
    if a.count:
        kw["count"] = parse_count(a.count)
    kw.pop("sigma_b2", None), kw.pop("c", None), kw.pop("density", None)
    if model == "one-way":
        kw.pop("c1", None), kw.pop("c2", None)
        return SimSpec.one_way(**kw)
    if model == "famsize":
        kw.pop("mu", None)
        return SimSpec.famsize(**kw)
    kw.pop("mu", None), kw.pop("c1", None), kw.pop("c2", None)
    if a.gamma:
        kw["gamma"] = _floats(a.gamma)
    if a.x:
        kw["x"] = tuple(a.x)
    return SimSpec.regression(**kw)


def cmd_simulate(a) -> int:
    spec = _sim_spec(a)
    data = generate(spec)
    if isinstance(data, SparseRatings):
        write_ratings_csv(data, a.out)
    else:
        write_grouped_csv(data, a.out)
    if a.save_config:
        with open(a.save_config, "w", encoding="utf-8") as fh:
            fh.write(spec.dumps() + "\n")
    from .report import dataset_summary
    report = {"simulated": a.out, "spec": spec.to_dict(), "dataset": dataset_summary(data)}
    _emit(report, a.json)
    return 0


# estimate ---------------------------------------------------------------
def _load(a):
    if a.model == "crossed":
        ts = a.timestamp_col
        if ts == "auto":
            ts = "t" if "t" in csv_header(a.input) else None
        data = read_ratings_csv(a.input, a.row_col, a.col_col, a.value_col, ts)
        schema = {"row_col": a.row_col, "col_col": a.col_col, "value_col": a.value_col,
                  "timestamp_col": ts}
        return data, schema
    regs = []
    if a.model == "regression":
        if a.regressor_cols:
            regs = [c.strip() for c in a.regressor_cols.split(",") if c.strip()]
        else:
            regs = [h for h in csv_header(a.input) if h not in (a.group_col, a.value_col)]
    data = read_grouped_csv(a.input, a.group_col, a.value_col, regs)
    schema = {"group_col": a.group_col, "value_col": a.value_col, "regressor_cols": regs}
    return data, schema


def _estimator(a):
    """Return ``(callable, kwargs, label)`` for the chosen model."""
    if a.model == "one-way":
        if getattr(a, "fixed_counts", False):
            return estimate_one_way_fixed, {"pivot": a.pivot}, "one-way-fixed"
        return estimate_one_way_fr, {"pivot": a.pivot}, "one-way"
    if a.model == "famsize":
        return estimate_famsize, {"opts": SolverOptions(tol=a.tol, max_iter=a.max_iter)}, "famsize"
    if a.model == "regression":
        return estimate_with_regressors, {}, "regression"
    return estimate_crossed, {"pivot": a.pivot}, "crossed"


def _provenance(a, schema, label):
    prov = {"input": a.input, "schema": schema, "estimator": label, "chunks": a.chunks,
            "shuffle_chunks": a.shuffle_chunks, "seed": a.seed}
    if a.model in ("one-way", "crossed"):
        prov["pivot"] = a.pivot
    if a.model == "famsize":
        prov.update(tol=a.tol, max_iter=a.max_iter)
    if a.model == "crossed" and a.diagnose_overlap:
        prov["max_pairs"] = a.max_pairs
    return prov


def _plan(a, data, g):
    shuffle = a.seed if a.shuffle_chunks else None
    if isinstance(data, SparseRatings):
        return make_stream_chunks(data, g, shuffle)
    return make_chunks(data, g, shuffle)


def cmd_estimate(a) -> int:
    data, schema = _load(a)
    fn, kw, label = _estimator(a)
    prov = _provenance(a, schema, label)
    if a.chunks and a.chunks > 1:
        plan = _plan(a, data, a.chunks)
        res = alchemy_estimate(data, plan, fn, workers=a.workers, **kw)
        report = alchemy_report(label, res, data, plan.describe(), prov)
    else:
        est = fn(data, **kw)
        report = estimate_report(label, est, data, prov)
    if a.model == "crossed" and a.diagnose_overlap:
        full = estimate_crossed(data, pivot=a.pivot)
        ov = overlap_distribution(data, max_pairs=a.max_pairs, seed=a.seed)
        model_cov, emp_cov = row_cov_diagnostic(full, ov, data)
        report["overlap"] = {"n_pairs": ov.n_pairs, "exhaustive": ov.exhaustive,
                             "mean_t": ov.mean_t,
                             "support": {str(t): p for t, p in ov.support}}
        report["row_cov"] = {"model_cov": model_cov, "empirical_cov": emp_cov}
    _emit(report, a.json)
    return 0


def cmd_compare(a) -> int:
    data, schema = _load(a)
    fr = estimate_one_way_fr(data, pivot=a.pivot)
    fx = estimate_one_way_fixed(data, pivot=a.pivot)
    names = fr.param_names
    vf, vx = fr.as_vector(), fx.as_vector()
    report = {
        "model": "one-way",
        "random_counts": dict(zip(names, vf.tolist())),
        "fixed_counts": dict(zip(names, vx.tolist())),
        "difference": dict(zip(names, (vf - vx).tolist())),
        "clamped": {"random_counts": dict(fr.clamped), "fixed_counts": dict(fx.clamped)},
        "provenance": {"input": a.input, "schema": schema, "pivot": a.pivot},
    }
    _emit(report, a.json)
    return 0


# bench ------------------------------------------------------------------
def _best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cmd_bench(a) -> int:
    if a.input:
        data, _ = _load(a)
        source = {"input": a.input}
    else:
        if a.model == "crossed":
            spec = SimSpec.crossed(r=a.r or 500, c=a.c or 500, density=a.density or 0.05,
                                   seed=a.seed or 0)
        else:
            spec = SimSpec.one_way(r=a.r or 4000, seed=a.seed or 0)
        data = generate(spec)
        source = {"spec": spec.to_dict()}
    fn, kw, label = _estimator(a)
    plan = _plan(a, data, a.chunks)
    t_full, _ = _best_time(lambda: fn(data, **kw), a.repeat)
    t_serial, r1 = _best_time(lambda: alchemy_estimate(data, plan, fn, workers=1, **kw),
                              a.repeat)
    t_par, rw = _best_time(lambda: alchemy_estimate(data, plan, fn, workers=a.workers, **kw),
                           a.repeat)
    ratio = t_par / t_serial if t_serial > 0 else float("nan")
    report = {
        "model": label,
        "chunks": a.chunks,
        "workers": a.workers,
        "seconds": {"full": t_full, "alchemy_serial": t_serial, "alchemy_parallel": t_par},
        "parallel_over_serial": ratio,
        "speedup_target": 0.6,
        "speedup_met": bool(ratio <= 0.6),
        "identical_results": bool(np.array_equal(r1.theta_bar, rw.theta_bar)
                                  and np.array_equal(r1.per_chunk, rw.per_chunk)),
        "source": source,
    }
    _emit(report, a.json)
    return 0


# parser -----------------------------------------------------------------
def _data_args(p):
    p.add_argument("--group-col", default="group")
    p.add_argument("--value-col", default="y")
    p.add_argument("--regressor-cols", default=None,
                   help="comma-separated; default: every column except group and value")
    p.add_argument("--row-col", default="row")
    p.add_argument("--col-col", default="col")
    p.add_argument("--timestamp-col", default="auto",
                   help="arrival-order column for crossed data; 'auto' uses 't' if present")


def _fit_args(p):
    p.add_argument("--pivot", choices=("centered", "raw"), default="centered")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--chunks", type=int, default=1, metavar="G")
    p.add_argument("--workers", type=int, default=1, metavar="W")
    p.add_argument("--shuffle-chunks", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fullrand",
                                 description="Moment estimation of variance components.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a dataset with known parameters")
    s.add_argument("--model", choices=MODELS, default="one-way")
    s.add_argument("--config", help="JSON simulation spec (overrides model flags)")
    s.add_argument("--save-config", help="write the spec used as JSON")
    s.add_argument("--out", required=True)
    s.add_argument("--r", type=int)
    s.add_argument("--c", type=int)
    s.add_argument("--density", type=float)
    s.add_argument("--seed", type=int)
    for name in ("mu", "sigma-a2", "sigma-b2", "sigma-e2", "c1", "c2"):
        s.add_argument(f"--{name}", type=float)
    s.add_argument("--gamma", help="comma-separated regression coefficients")
    s.add_argument("--x", action="append",
                   help="regressor component: 1 | normal:MEAN:SD | uniform:LO:HI (repeatable)")
    s.add_argument("--count", help="poisson:LAM (1+Poisson) | uniform:LO:HI | const:N")
    for eff in ("alpha", "beta", "eps"):
        s.add_argument(f"--{eff}-dist", choices=("normal", "gamma", "uniform"))
    s.add_argument("--gamma-shape", type=float, default=2.0)
    s.add_argument("--mode", choices=("bernoulli", "draws"), default="bernoulli")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="fit a model to a CSV file")
    e.add_argument("--model", choices=MODELS, required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--fixed-counts", action="store_true",
                   help="one-way only: treat group sizes as fixed design constants")
    e.add_argument("--diagnose-overlap", action="store_true")
    e.add_argument("--max-pairs", type=int, default=100_000)
    _data_args(e)
    _fit_args(e)
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("compare", help="random-count vs fixed-count one-way fits")
    c.add_argument("--input", required=True)
    c.add_argument("--model", choices=("one-way",), default="one-way")
    _data_args(c)
    c.add_argument("--pivot", choices=("centered", "raw"), default="centered")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_compare)

    b = sub.add_parser("bench", help="time full vs chunked estimation")
    b.add_argument("--model", choices=("one-way", "crossed"), default="crossed")
    b.add_argument("--input")
    b.add_argument("--r", type=int)
    b.add_argument("--c", type=int)
    b.add_argument("--density", type=float)
    b.add_argument("--repeat", type=int, default=3)
    _data_args(b)
    _fit_args(b)
    b.set_defaults(func=cmd_bench, chunks=4, workers=4)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    if getattr(a, "chunks", 1) is not None and getattr(a, "chunks", 1) < 1:
        ap.print_usage(sys.stderr)
        print("fullrand: error: --chunks must be >= 1", file=sys.stderr)
        return 2
    if getattr(a, "workers", 1) < 1:
        ap.print_usage(sys.stderr)
        print("fullrand: error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return a.func(a)
    except (DataError, OSError) as e:
        print(f"fullrand: error: {e}", file=sys.stderr)
        return 1


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
