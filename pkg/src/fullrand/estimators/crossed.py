"""Two-way crossed model ``Y_ij = mu + alpha_i + beta_j + eps_ij`` on sparse data.

Moment equations, with ``N`` the row counts and ``M`` the column counts
treated as random and their moments plugged in empirically:

    row sums:    Var(R) - mu^2 Var(N) = E[N^2] sa2 + E[N] (sb2 + se2)
    column sums: Var(C) - mu^2 Var(M) = E[M^2] sb2 + E[M] (sa2 + se2)
    pointwise:   Var(Y)               = sa2 + sb2 + se2

A row sum is ``N mu + N alpha + (beta_1 + ... + beta_N) + (eps_1 + ... + eps_N)``;
conditioning on ``N`` gives the first equation, and the second follows by
symmetry. Pivots work as in the one-way fit (``"centered"`` uses
``Var(R_i - mu_hat N_i)``).

Two distinct rows share ``T`` columns, so their sums have covariance
``E[T] sb2`` through ``beta_1 + ... + beta_T``; ``overlap_distribution``
estimates the law of ``T`` and ``row_cov_diagnostic`` checks the implied
covariance against the data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from ..data import SparseRatings
from ..errors import InsufficientData, Singular
from ..moments import sample_var
from ..results import CrossedEstimate
from ._solve import clamped_solve
from .oneway import PIVOTS

DEFAULT_MAX_PAIRS = 100_000
_NAMES = ("sigma_a2", "sigma_b2", "sigma_e2")


def crossed_moments(data: SparseRatings, pivot: str = "centered"):
    """Left-hand sides and coefficient matrix of the crossed system.

    Returns ``(A, b, mu, (nu1, nu2), (m1, m2))``.
    """
    if pivot not in PIVOTS:
        raise ValueError(f"pivot must be one of {PIVOTS}")
    y = data.values
    mu = math.fsum(y) / y.size
    n = data.row_counts.astype(float)
    m = data.col_counts.astype(float)
    rs, cs = data.row_sums, data.col_sums
    nu1, nu2 = float(n.mean()), sample_var(n)
    m1, m2 = float(m.mean()), sample_var(m)
    if pivot == "centered":
        lr = sample_var(rs - mu * n)
        lc = sample_var(cs - mu * m)
    else:
        lr = sample_var(rs) - mu * mu * nu2
        lc = sample_var(cs) - mu * mu * m2
    A = np.array([[nu2 + nu1 ** 2, nu1, nu1],
                  [m1, m2 + m1 ** 2, m1],
                  [1.0, 1.0, 1.0]])
    b = np.array([lr, lc, sample_var(y)])
    return A, b, mu, (nu1, nu2), (m1, m2)


def estimate_crossed(data: SparseRatings, pivot: str = "centered") -> CrossedEstimate:
    """Moment fit of the crossed two-component model.

    Raises ``Singular`` when the system cannot separate the components, e.g.
    when every row and every column holds a single entry.
    """
    if data.n_rows < 2 or data.n_cols < 2:
        raise InsufficientData("need at least 2 rows and 2 columns")
    if data.n_entries < 4:
        raise InsufficientData(f"need at least 4 entries, got {data.n_entries}")
    A, b, mu, rowm, colm = crossed_moments(data, pivot)
    scale = float(np.var(data.values)) + mu * mu
    x, raw, flags = clamped_solve(A, b, _NAMES, 2, scale, exc=Singular,
                                  what="crossed moment system")
    return CrossedEstimate(mu=mu, sigma_a2=float(x[0]), sigma_b2=float(x[1]),
                           sigma_e2=float(x[2]), row_count_moments=rowm,
                           col_count_moments=colm, clamped=flags,
                           raw=tuple(map(float, raw)), moments=tuple(map(float, b)))


@dataclass(frozen=True)
class OverlapDistribution:
    support: tuple  # ((t, probability), ...) ascending in t
    mean_t: float
    n_pairs: int
    exhaustive: bool
    pairs: tuple = ()  # (first rows, second rows) arrays used

    def as_dict(self) -> dict:
        return {int(t): float(p) for t, p in self.support}


def _pair_from_index(k, r):
    """Map linear indices over pairs (a < b) in row-major order to ``(a, b)``."""
    k = np.asarray(k, dtype=np.int64)
    # number of pairs starting before row a: a*r - a*(a+1)/2
    a = (2 * r - 1 - np.sqrt((2.0 * r - 1) ** 2 - 8.0 * k)) // 2
    a = a.astype(np.int64)
    before = a * r - a * (a + 1) // 2
    # guard the float estimate
    over = before > k
    while over.any():
        a[over] -= 1
        before = a * r - a * (a + 1) // 2
        over = before > k
    nxt = (a + 1) * r - (a + 1) * (a + 2) // 2
    under = nxt <= k
    while under.any():
        a[under] += 1
        before = a * r - a * (a + 1) // 2
        nxt = (a + 1) * r - (a + 1) * (a + 2) // 2
        under = nxt <= k
    b = k - before + a + 1
    return a, b


def _indicator(data: SparseRatings, weights=None):
    w = np.ones(data.n_entries) if weights is None else weights
    return sp.csr_matrix((w, (data.rows, data.cols)), shape=(data.n_rows, data.n_cols))


def _pair_products(Z, a, b) -> np.ndarray:
    return np.asarray(Z[a].multiply(Z[b]).sum(axis=1)).reshape(-1)


def sample_pairs(r: int, max_pairs: int | None = DEFAULT_MAX_PAIRS, seed: int = 0):
    """All row pairs if there are at most ``max_pairs`` of them, else a seeded sample.

    Returns ``(a, b, exhaustive)`` with ``a < b``.
    """
    total = comb(r, 2)
    if max_pairs is None or total <= max_pairs:
        a, b = np.triu_indices(r, k=1)
        return a.astype(np.int64), b.astype(np.int64), True
    rng = np.random.default_rng(seed)
    k = np.sort(rng.choice(total, size=max_pairs, replace=False))
    a, b = _pair_from_index(k, r)
    return a, b, False


def overlap_distribution(data: SparseRatings, max_pairs: int | None = DEFAULT_MAX_PAIRS,
                         seed: int = 0) -> OverlapDistribution:
    """Empirical distribution of the common-column count ``T`` over row pairs."""
    if data.n_rows < 2:
        raise InsufficientData("need at least 2 rows")
    a, b, exhaustive = sample_pairs(data.n_rows, max_pairs, seed)
    t = np.rint(_pair_products(_indicator(data), a, b)).astype(np.int64)
    vals, cnt = np.unique(t, return_counts=True)
    probs = cnt / t.size
    support = tuple((int(v), float(p)) for v, p in zip(vals, probs))
    return OverlapDistribution(support=support, mean_t=float(t.mean()), n_pairs=int(t.size),
                               exhaustive=exhaustive, pairs=(a, b))


class CovDiagnostic(NamedTuple):
    model_cov: float
    empirical_cov: float


def row_cov_diagnostic(est: CrossedEstimate, ov: OverlapDistribution,
                       data: SparseRatings) -> CovDiagnostic:
    """Model-implied versus empirical covariance of two distinct row sums.

    The model value is ``E[T] * sigma_b2``. The empirical value averages, over
    the pairs in ``ov``, the cross products ``(Y_kj - mu)(Y_mj - mu)`` summed
    over the columns ``j`` both rows observed; these are the only terms of
    ``Cov(Y_k., Y_m.)`` with nonzero expectation, and unlike a raw covariance
    of row sums the estimate is not swamped by the ``O(Var(R)/r)`` bias from
    centring at an estimated mean.
    """
    model = ov.mean_t * est.sigma_b2
    a, b = ov.pairs
    if len(a) == 0:
        return CovDiagnostic(float(model), 0.0)
    D = _indicator(data, data.values - est.mu)
    emp = float(_pair_products(D, a, b).mean())
    return CovDiagnostic(float(model), emp)
