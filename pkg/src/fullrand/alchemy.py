"""Software Alchemy: estimate on i.i.d. chunks, average, and use the spread for SEs.

If the full-data estimator is asymptotically normal, so is the chunk
average, with the same asymptotic covariance. The chunk estimates also
give standard errors for free: ``sqrt(diag(cov(chunks)) / g)``.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .data import GroupedSample, SparseRatings
from .errors import ChunkEstimationFailed, DataError, InsufficientChunks, TooManyChunks
from .estimators import ESTIMATORS
from .results import AlchemyResult

__all__ = ["ChunkPlan", "make_chunks", "make_stream_chunks", "alchemy_estimate",
           "average_chunks", "chunk_data"]


@dataclass(frozen=True)
class ChunkPlan:
    """``assignment[u]`` is the chunk of unit ``u``.

    Units are groups for a ``GroupedSample`` and arrival positions for a
    ``SparseRatings``. ``order`` lists the units in processing order.
    """

    g: int
    assignment: np.ndarray
    unit: str  # "group" or "arrival"
    order: np.ndarray

    @property
    def sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.g).tolist()

    def members(self, k: int) -> np.ndarray:
        """Units of chunk ``k`` in processing order."""
        return self.order[self.assignment[self.order] == k]

    def describe(self) -> dict:
        return {"g": self.g, "unit": self.unit, "sizes": self.sizes,
                "shuffled": bool(not np.array_equal(self.order, np.arange(self.order.size)))}


def _contiguous(n: int, g: int, unit: str, shuffle_seed=None) -> ChunkPlan:
    if g < 1:
        raise ValueError("g must be positive")
    if g > n:
        raise TooManyChunks(f"cannot split {n} {unit} units into {g} chunks")
    order = np.arange(n)
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(n)
    # first n % g chunks get the extra unit
    q, rem = divmod(n, g)
    sizes = np.full(g, q)
    sizes[:rem] += 1
    chunk_of_pos = np.repeat(np.arange(g), sizes)
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = chunk_of_pos
    return ChunkPlan(g, assignment, unit, order)


def make_chunks(data: GroupedSample, g: int, shuffle_seed: int | None = None) -> ChunkPlan:
    """Split the groups into ``g`` contiguous chunks of near-equal size.

    With ``shuffle_seed`` the groups are permuted first (seeded).
    """
    return _contiguous(data.r, g, "group", shuffle_seed)


def make_stream_chunks(data: SparseRatings, g: int, shuffle_seed: int | None = None) -> ChunkPlan:
    """Split entries into ``g`` contiguous blocks of the arrival sequence."""
    return _contiguous(data.n_entries, g, "arrival", shuffle_seed)


def chunk_data(data, plan: ChunkPlan, k: int):
    """Materialize chunk ``k`` as a dataset of the same type."""
    if plan.g == 1:
        return data
    units = plan.members(k)
    if plan.unit == "group":
        return data.subset(units)
    return data.subset(data.arrival[units])


def average_chunks(per_chunk: np.ndarray) -> np.ndarray:
    """Elementwise mean over chunks, reduced in chunk-index order."""
    per_chunk = np.asarray(per_chunk, dtype=float)
    # contiguous per-parameter rows -> numpy pairwise summation along them
    return np.ascontiguousarray(per_chunk.T).sum(axis=1) / per_chunk.shape[0]


def _resolve(base):
    if callable(base):
        return base
    try:
        return ESTIMATORS[base]
    except KeyError:
        raise ValueError(f"unknown estimator {base!r}; choose from {sorted(ESTIMATORS)}") from None


def _run_one(fn, kwargs, item):
    k, chunk = item
    try:
        return k, fn(chunk, **kwargs), None
    except DataError as e:
        return k, None, e


def alchemy_estimate(data, plan: ChunkPlan, base="one-way", workers: int = 1,
                     require_se: bool = False, **estimator_kwargs) -> AlchemyResult:
    """Run ``base`` on every chunk and combine.

    Parameters
    ----------
    base : str or callable
        A key of ``ESTIMATORS`` or a function ``dataset -> estimate`` with an
        ``as_vector()`` method and ``param_names``.
    workers : int
        Worker processes. With 1, chunks are built and estimated one at a
        time, so only one chunk is in memory at once.
    require_se : bool
        Raise ``InsufficientChunks`` if ``plan.g < 2``.
    """
    fn = _resolve(base)
    if require_se and plan.g < 2:
        raise InsufficientChunks("standard errors need at least 2 chunks")
    items = ((k, chunk_data(data, plan, k)) for k in range(plan.g))
    task = partial(_run_one, fn, estimator_kwargs)
    if workers > 1 and plan.g > 1:
        with ProcessPoolExecutor(max_workers=min(workers, plan.g)) as ex:
            outcomes = list(ex.map(task, items))
    else:
        outcomes = [task(it) for it in items]
    outcomes.sort(key=lambda o: o[0])
    for k, est, err in outcomes:
        if err is not None:
            raise ChunkEstimationFailed(k, err)
    ests = [o[1] for o in outcomes]
    per_chunk = np.vstack([e.as_vector() for e in ests])
    theta_bar = average_chunks(per_chunk)
    if plan.g >= 2:
        emp_cov = np.atleast_2d(np.cov(per_chunk, rowvar=False, ddof=1))
        std_errors = np.sqrt(np.diag(emp_cov) / plan.g)
    else:
        emp_cov = std_errors = None
    clamp_counts = {}
    for e in ests:
        for name, hit in getattr(e, "clamped", {}).items():
            clamp_counts[name] = clamp_counts.get(name, 0) + int(hit)
    return AlchemyResult(g=plan.g, param_names=tuple(ests[0].param_names), per_chunk=per_chunk,
                         theta_bar=theta_bar, emp_cov=emp_cov, std_errors=std_errors,
                         clamp_counts=clamp_counts, chunk_estimates=tuple(ests))
