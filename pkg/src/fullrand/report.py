"""Run reports: a nested dict, rendered either as JSON or as a flat text table.

The table prints every leaf of the JSON document as ``dotted.key  value``
with numbers formatted by ``fmt``, so the two forms carry the same numbers.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .results import (AlchemyResult, CrossedEstimate, FamSizeEstimate, OneWayEstimate,
                      RegressionEstimate, _plain)


def fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return f"{v:.10g}"
    return str(v)


def _diagnostics(est) -> dict:
    d = {"raw_solution": list(est.raw)}
    if isinstance(est, FamSizeEstimate):
        d.update(iterations=est.iterations, converged=est.converged,
                 residual_norm=est.residual_norm, n_moments=list(est.n_moments))
    if isinstance(est, CrossedEstimate):
        d["moments"] = list(est.moments)
    if isinstance(est, RegressionEstimate):
        d["residuals"] = dict(est.residual_summary)
    return d


def dataset_summary(data) -> dict:
    from .data import GroupedSample
    if isinstance(data, GroupedSample):
        n = data.counts.astype(float)
        return {"r": data.r, "M": data.M, "p": data.p, "count_mean": float(n.mean()),
                "count_var": float(n.var(ddof=1)) if data.r > 1 else None}
    n = data.row_counts.astype(float)
    m = data.col_counts.astype(float)
    return {"r": data.n_rows, "c": data.n_cols, "entries": data.n_entries,
            "row_count_mean": float(n.mean()),
            "row_count_var": float(n.var(ddof=1)) if n.size > 1 else None,
            "col_count_mean": float(m.mean()),
            "col_count_var": float(m.var(ddof=1)) if m.size > 1 else None}


def estimate_report(model: str, est, data, provenance: dict) -> dict:
    names = est.param_names
    vec = est.as_vector()
    return _plain({
        "model": model,
        "estimates": dict(zip(names, vec.tolist())),
        "std_errors": None,
        "clamped": dict(est.clamped),
        "diagnostics": _diagnostics(est),
        "dataset": dataset_summary(data),
        "provenance": provenance,
    })


def alchemy_report(model: str, res: AlchemyResult, data, plan_info: dict,
                   provenance: dict) -> dict:
    ses = None if res.std_errors is None else dict(zip(res.param_names, res.std_errors.tolist()))
    diag = {"chunk_plan": plan_info,
            "per_chunk": res.per_chunk.tolist()}
    if res.emp_cov is not None:
        diag["emp_cov"] = res.emp_cov.tolist()
    fam = [e for e in res.chunk_estimates if isinstance(e, FamSizeEstimate)]
    if fam:
        diag["chunks_converged"] = sum(e.converged for e in fam)
        diag["max_iterations"] = max(e.iterations for e in fam)
    return _plain({
        "model": model,
        "estimates": dict(zip(res.param_names, res.theta_bar.tolist())),
        "std_errors": ses,
        "clamped": {k: v for k, v in res.clamp_counts.items()},
        "diagnostics": diag,
        "dataset": dataset_summary(data),
        "provenance": provenance,
    })


def _flatten(prefix, v, out):
    if isinstance(v, dict):
        for k, x in v.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), x, out)
    elif isinstance(v, (list, tuple)):
        if not v:
            out.append((prefix, "[]"))
        for i, x in enumerate(v):
            _flatten(f"{prefix}[{i}]", x, out)
    else:
        out.append((prefix, fmt(v)))


def flatten(report: dict) -> list[tuple[str, str]]:
    out = []
    _flatten("", report, out)
    return out


def render_table(report: dict) -> str:
    rows = flatten(report)
    width = max(len(k) for k, _ in rows)
    lines = []
    section = None
    for k, v in rows:
        top = k.split(".", 1)[0].split("[", 1)[0]
        if top != section:
            if section is not None:
                lines.append("")
            section = top
        lines.append(f"{k.ljust(width)}  {v}")
    return "\n".join(lines)


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=True)
