import sys

import numpy as np
import pytest

from fullrand import GroupedSample, SparseRatings


@pytest.fixture
def tiny_groups():
    return GroupedSample.from_groups([[1.0, 2.0], [3.0]])


@pytest.fixture
def clamp_groups():
    return GroupedSample.from_groups([[0.0, 0.0], [2.0, 2.0]])


def random_grouped(rng, r=30, lo=1, hi=6, p=0):
    counts = rng.integers(lo, hi + 1, size=r)
    values = rng.normal(size=counts.sum()) * 3 + 1
    x = None
    if p:
        x = np.column_stack([np.ones(r), rng.normal(size=(r, p - 1))])
    return GroupedSample(values, counts, regressors=x)


def random_ratings(rng, r=8, c=6, density=0.5):
    z = rng.random((r, c)) < density
    ii, jj = np.nonzero(z)
    return SparseRatings(r, c, ii, jj, rng.normal(size=ii.size))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
