"""Data containers for grouped (one-way) and sparse crossed samples.

Both containers keep their payload in flat numpy arrays and are read-only
once constructed, so they can be shared between threads and pickled to
worker processes cheaply.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (DuplicateCell, EmptyGroup, IndexOutOfRange,
                     InsufficientData, RaggedRegressors)

__all__ = ["Group", "GroupedSample", "SparseRatings", "validate"]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Group:
    id: Any
    responses: np.ndarray
    regressors: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.responses)


class GroupedSample:
    """One-way data: ``r`` groups of responses, optional group-level regressors.

    Parameters
    ----------
    values : array_like
        All responses concatenated in group order (length ``M``).
    counts : array_like of int
        Group sizes ``N_i`` (length ``r``), summing to ``M``.
    ids : sequence, optional
        Group labels; defaults to ``0..r-1``.
    regressors : array_like, optional
        ``(r, p)`` matrix, one row ``X_i`` per group. No intercept column is
        added; include a column of ones yourself if you want one.
    check : bool
        Validate invariants on construction (default). ``validate`` can be
        called later on an unchecked instance.
    """

    def __init__(self, values, counts, ids: Sequence | None = None,
                 regressors=None, check: bool = True):
        self.values = _frozen(values, float).reshape(-1)
        self.counts = _frozen(counts, np.int64).reshape(-1)
        self.ids = tuple(range(len(self.counts))) if ids is None else tuple(ids)
        if regressors is not None:
            regressors = _frozen(regressors, float)
            if regressors.ndim == 1:
                regressors = regressors.reshape(-1, 1)
                regressors.flags.writeable = False
        self.regressors = regressors
        if check:
            self.check()

    @classmethod
    def from_groups(cls, groups: Iterable, regressors=None, check: bool = True):
        """Build from an iterable of ``Group`` objects or plain response lists."""
        ids, chunks, xs = [], [], []
        for k, g in enumerate(groups):
            if isinstance(g, Group):
                ids.append(g.id)
                chunks.append(np.asarray(g.responses, float).reshape(-1))
                xs.append(g.regressors)
            else:
                ids.append(k)
                chunks.append(np.asarray(g, float).reshape(-1))
                xs.append(None)
        if regressors is None and any(x is not None for x in xs):
            if any(x is None for x in xs):
                raise RaggedRegressors("some groups carry regressors and some do not")
            lengths = {np.size(x) for x in xs}
            if len(lengths) != 1:
                raise RaggedRegressors(f"regressor lengths differ across groups: {sorted(lengths)}")
            regressors = np.array([np.asarray(x, float).reshape(-1) for x in xs])
        counts = [len(c) for c in chunks]
        values = np.concatenate(chunks) if chunks else np.empty(0)
        return cls(values, counts, ids=ids, regressors=regressors, check=check)

    def check(self) -> "GroupedSample":
        if len(self.counts) == 0:
            raise InsufficientData("sample has no groups")
        if len(self.ids) != len(self.counts):
            raise ValueError("ids and counts differ in length")
        empty = np.flatnonzero(self.counts < 1)
        if empty.size:
            raise EmptyGroup(f"group {self.ids[empty[0]]!r} has no responses")
        if int(self.counts.sum()) != len(self.values):
            raise ValueError("counts do not sum to the number of responses")
        if self.regressors is not None:
            if self.regressors.ndim != 2 or self.regressors.shape[0] != len(self.counts):
                raise RaggedRegressors(
                    f"regressor matrix has shape {self.regressors.shape}, "
                    f"expected ({len(self.counts)}, p)")
        return self

    @property
    def r(self) -> int:
        return len(self.counts)

    @property
    def M(self) -> int:
        return len(self.values)

    @property
    def p(self) -> int:
        return 0 if self.regressors is None else self.regressors.shape[1]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.counts)))

    @property
    def group_index(self) -> np.ndarray:
        """Group index of every observation."""
        return np.repeat(np.arange(self.r), self.counts)

    @property
    def groups(self) -> list[Group]:
        off = self.offsets
        return [Group(self.ids[i], self.values[off[i]:off[i + 1]],
                      None if self.regressors is None else self.regressors[i])
                for i in range(self.r)]

    def subset(self, idx) -> "GroupedSample":
        """New sample holding the groups at positions ``idx`` (in that order)."""
        idx = np.asarray(idx, dtype=np.int64)
        off = self.offsets
        if idx.size and np.all(np.diff(idx) == 1):
            lo, hi = off[idx[0]], off[idx[-1] + 1]
            values = self.values[lo:hi]
        else:
            values = np.concatenate([self.values[off[i]:off[i + 1]] for i in idx]) \
                if idx.size else np.empty(0)
        x = None if self.regressors is None else self.regressors[idx]
        return GroupedSample(values, self.counts[idx], ids=[self.ids[i] for i in idx],
                             regressors=x, check=False)

    def __eq__(self, other):
        if not isinstance(other, GroupedSample):
            return NotImplemented
        same_x = (self.regressors is None and other.regressors is None) or (
            self.regressors is not None and other.regressors is not None
            and np.array_equal(self.regressors, other.regressors))
        return (np.array_equal(self.values, other.values)
                and np.array_equal(self.counts, other.counts)
                and self.ids == other.ids and same_x)

    __hash__ = None

    def __repr__(self):
        return f"GroupedSample(r={self.r}, M={self.M}, p={self.p})"


class SparseRatings:
    """Crossed data on an ``n_rows x n_cols`` grid; a cell is observed iff present.

    Indices are 0-based here; use ``from_triples`` for 1-based input.
    ``arrival_order[k]`` is the entry index submitted ``k``-th.
    """

    def __init__(self, n_rows: int, n_cols: int, rows, cols, values,
                 arrival_order=None, row_features=None, col_features=None,
                 collapsed_duplicates: int = 0, check: bool = True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.rows = _frozen(rows, np.int64).reshape(-1)
        self.cols = _frozen(cols, np.int64).reshape(-1)
        self.values = _frozen(values, float).reshape(-1)
        self.arrival_order = None if arrival_order is None else _frozen(arrival_order, np.int64)
        self.row_features = None if row_features is None else _frozen(row_features, float)
        self.col_features = None if col_features is None else _frozen(col_features, float)
        self.collapsed_duplicates = int(collapsed_duplicates)
        if check:
            self.check()

    @classmethod
    def from_triples(cls, n_rows: int, n_cols: int, triples, arrival_order=None,
                     check: bool = True):
        """Build from 1-based ``(i, j, y)`` triples."""
        t = list(triples)
        rows = np.array([e[0] for e in t], dtype=np.int64)
        cols = np.array([e[1] for e in t], dtype=np.int64)
        vals = np.array([e[2] for e in t], dtype=float)
        if check:
            bad = (rows < 1) | (rows > n_rows) | (cols < 1) | (cols > n_cols)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise IndexOutOfRange(f"entry {t[k]!r} outside 1..{n_rows} x 1..{n_cols}")
        return cls(n_rows, n_cols, rows - 1, cols - 1, vals,
                   arrival_order=arrival_order, check=check)

    def check(self) -> "SparseRatings":
        if self.n_rows < 1 or self.n_cols < 1:
            raise InsufficientData("grid dimensions must be positive")
        n = len(self.values)
        if len(self.rows) != n or len(self.cols) != n:
            raise ValueError("rows, cols and values differ in length")
        bad = (self.rows < 0) | (self.rows >= self.n_rows) | (self.cols < 0) | (self.cols >= self.n_cols)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise IndexOutOfRange(
                f"entry ({self.rows[k] + 1}, {self.cols[k] + 1}) outside "
                f"1..{self.n_rows} x 1..{self.n_cols}")
        keys = self.rows * self.n_cols + self.cols
        uniq, first, cnt = np.unique(keys, return_index=True, return_counts=True)
        if uniq.size != n:
            k = int(uniq[np.flatnonzero(cnt > 1)[0]])
            raise DuplicateCell(f"cell ({k // self.n_cols + 1}, {k % self.n_cols + 1}) appears more than once")
        if self.arrival_order is not None:
            if not np.array_equal(np.sort(self.arrival_order), np.arange(n)):
                raise ValueError("arrival_order is not a permutation of the entries")
        return self

    @property
    def n_entries(self) -> int:
        return len(self.values)

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        """1-based ``(i, j, y)`` triples in storage order."""
        return [(int(i) + 1, int(j) + 1, float(v))
                for i, j, v in zip(self.rows, self.cols, self.values)]

    @property
    def arrival(self) -> np.ndarray:
        """Arrival order, falling back to storage order."""
        if self.arrival_order is None:
            return np.arange(self.n_entries)
        return self.arrival_order

    @property
    def row_counts(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n_rows)

    @property
    def col_counts(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.n_cols)

    @property
    def row_sums(self) -> np.ndarray:
        return np.bincount(self.rows, self.values, minlength=self.n_rows)

    @property
    def col_sums(self) -> np.ndarray:
        return np.bincount(self.cols, self.values, minlength=self.n_cols)

    def row_column_sets(self) -> list[set[int]]:
        sets = [set() for _ in range(self.n_rows)]
        for i, j in zip(self.rows, self.cols):
            sets[i].add(int(j))
        return sets

    def subset(self, entry_idx) -> "SparseRatings":
        """Entries at ``entry_idx`` on the same grid; the index order becomes the arrival order."""
        idx = np.asarray(entry_idx, dtype=np.int64)
        return SparseRatings(self.n_rows, self.n_cols, self.rows[idx], self.cols[idx],
                             self.values[idx], arrival_order=np.arange(idx.size), check=False)

    def __eq__(self, other):
        if not isinstance(other, SparseRatings):
            return NotImplemented
        return (self.n_rows == other.n_rows and self.n_cols == other.n_cols
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.arrival, other.arrival))

    __hash__ = None

    def __repr__(self):
        return f"SparseRatings(r={self.n_rows}, c={self.n_cols}, entries={self.n_entries})"


def validate(sample):
    """Return ``sample`` unchanged if every type invariant holds; raise otherwise."""
    if isinstance(sample, (GroupedSample, SparseRatings)):
        return sample.check()
    raise TypeError(f"cannot validate {type(sample).__name__}")
