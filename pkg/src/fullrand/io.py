"""CSV ingestion and export (UTF-8, comma separated, header row required)."""
from __future__ import annotations

import csv

import numpy as np

from .data import GroupedSample, SparseRatings
from .errors import DuplicateCell, EmptyFile, InconsistentRegressor, ParseError

__all__ = ["read_grouped_csv", "write_grouped_csv", "read_ratings_csv", "write_ratings_csv",
           "csv_header"]


def csv_header(path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        row = next(csv.reader(fh), None)
    if row is None:
        raise EmptyFile(f"{path}: file is empty")
    return [h.strip() for h in row]


def _rows(path, needed):
    """Yield ``(line_number, {col: text})`` for the columns in ``needed``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: file is empty")
        header = [h.strip() for h in header]
        pos = {}
        for col in needed:
            if col not in header:
                raise ParseError(f"missing column {col!r} (header: {header})", line=1)
            pos[col] = header.index(col)
        seen = False
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
            seen = True
            yield line, {c: row[i].strip() for c, i in pos.items()}
        if not seen:
            raise EmptyFile(f"{path}: no data rows")


def _num(text, line, col):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line=line, column=col) from None


def read_grouped_csv(path, group_col: str = "group", value_col: str = "y",
                     regressor_cols=()) -> GroupedSample:
    """Long-format one-way data: one row per response.

    Groups keep their order of first appearance. Regressor columns must be
    constant within a group.
    """
    regressor_cols = list(regressor_cols or ())
    order, values, xs = [], {}, {}
    for line, rec in _rows(path, [group_col, value_col, *regressor_cols]):
        gid = rec[group_col]
        y = _num(rec[value_col], line, value_col)
        x = tuple(_num(rec[c], line, c) for c in regressor_cols)
        if gid not in values:
            order.append(gid)
            values[gid] = []
            xs[gid] = x
        elif x != xs[gid]:
            raise InconsistentRegressor(
                f"line {line}: regressors of group {gid!r} change from {xs[gid]} to {x}")
        values[gid].append(y)
    counts = [len(values[g]) for g in order]
    flat = np.array([v for g in order for v in values[g]], dtype=float)
    x = np.array([xs[g] for g in order], dtype=float) if regressor_cols else None
    return GroupedSample(flat, counts, ids=order, regressors=x)


def write_grouped_csv(sample: GroupedSample, path, group_col: str = "group",
                      value_col: str = "y", regressor_cols=None) -> None:
    """Inverse of ``read_grouped_csv``; floats are written round-trip exact."""
    p = sample.p
    if regressor_cols is None:
        regressor_cols = [f"x{k + 1}" for k in range(p)]
    if len(regressor_cols) != p:
        raise ValueError(f"need {p} regressor column names")
    off = sample.offsets
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([group_col, value_col, *regressor_cols])
        for i, gid in enumerate(sample.ids):
            xr = [repr(float(v)) for v in sample.regressors[i]] if p else []
            for y in sample.values[off[i]:off[i + 1]]:
                w.writerow([gid, repr(float(y)), *xr])


def read_ratings_csv(path, row_col: str = "row", col_col: str = "col", value_col: str = "y",
                     timestamp_col: str | None = None) -> SparseRatings:
    """``(row, col, value)`` triples, MovieLens style.

    Row and column labels map to dense indices by first appearance. Arrival
    order follows ``timestamp_col`` ascending (ties keep file order) when
    given, else file order.
    """
    needed = [row_col, col_col, value_col] + ([timestamp_col] if timestamp_col else [])
    row_ids, col_ids = {}, {}
    rows, cols, vals, stamps = [], [], [], []
    seen = {}
    for line, rec in _rows(path, needed):
        i = row_ids.setdefault(rec[row_col], len(row_ids))
        j = col_ids.setdefault(rec[col_col], len(col_ids))
        if (i, j) in seen:
            raise DuplicateCell(f"line {line}: cell ({rec[row_col]!r}, {rec[col_col]!r}) "
                                f"already given on line {seen[(i, j)]}")
        seen[(i, j)] = line
        rows.append(i)
        cols.append(j)
        vals.append(_num(rec[value_col], line, value_col))
        if timestamp_col:
            stamps.append(_num(rec[timestamp_col], line, timestamp_col))
    arrival = np.argsort(np.array(stamps), kind="stable") if timestamp_col else None
    return SparseRatings(len(row_ids), len(col_ids), rows, cols, vals, arrival_order=arrival)


def write_ratings_csv(data: SparseRatings, path, row_col: str = "row", col_col: str = "col",
                      value_col: str = "y", timestamp_col: str = "t") -> None:
    """Write entries in storage order with 1-based indices and arrival rank.

    Rows or columns without any entry cannot be represented and are lost.
    """
    rank = np.empty(data.n_entries, dtype=np.int64)
    rank[data.arrival] = np.arange(data.n_entries)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([row_col, col_col, value_col, timestamp_col])
        for i, j, y, t in zip(data.rows, data.cols, data.values, rank):
            w.writerow([int(i) + 1, int(j) + 1, repr(float(y)), int(t)])
