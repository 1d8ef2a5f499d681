"""Sample moments and the pivot quantities every moment estimator is built on.

Variances use the unbiased ``n - 1`` divisor, third and fourth central
moments the plain ``n`` divisor. Reductions use ``math.fsum`` (correctly
rounded), so results do not depend on the order of the input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import GroupedSample
from .errors import InsufficientData

__all__ = ["MomentSummary", "summarize", "group_sums", "grand_mean", "count_summary",
           "sample_var"]


@dataclass(frozen=True)
class MomentSummary:
    n: int
    mean: float
    var: float
    central3: float | None = None
    central4: float | None = None


def sample_var(x) -> float:
    """Unbiased sample variance (two-pass)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise InsufficientData(f"variance needs at least 2 values, got {x.size}")
    d = x - math.fsum(x) / x.size
    return math.fsum(d * d) / (x.size - 1)


def summarize(values, order: int = 2) -> MomentSummary:
    """Mean, unbiased variance and, for ``order=4``, central moments 3 and 4."""
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size < 2:
        raise InsufficientData(f"need at least 2 values, got {x.size}")
    mean = math.fsum(x) / x.size
    d = x - mean
    d2 = d * d
    var = math.fsum(d2) / (x.size - 1)
    if order == 2:
        return MomentSummary(x.size, mean, var)
    return MomentSummary(x.size, mean, var, math.fsum(d2 * d) / x.size,
                         math.fsum(d2 * d2) / x.size)


def group_sums(sample: GroupedSample) -> np.ndarray:
    """Per-group totals ``Y_i.`` in group order."""
    return np.bincount(sample.group_index, weights=sample.values, minlength=sample.r)


def grand_mean(sample: GroupedSample, sums=None) -> float:
    """Observation-weighted mean ``Y.. / M`` (not the mean of group means)."""
    if sample.M < 1:
        raise InsufficientData("no observations")
    if sums is None:
        sums = group_sums(sample)
    return math.fsum(sums) / sample.M


def count_summary(sample: GroupedSample, order: int = 2) -> MomentSummary:
    """Moments of the group sizes ``N_1..N_r``."""
    return summarize(sample.counts, order=order)
