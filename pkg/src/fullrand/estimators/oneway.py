"""Moment estimators for the one-way model ``Y_ij = mu + alpha_i + eps_ij``.

Two pivots are supported for the group-sum equation

    Var(S) - Var(E[S | N]) = (nu2 + nu1**2) sigma_a2 + nu1 sigma_e2

``"centered"`` (default) estimates the left side by the sample variance of
``S_i - mu_hat N_i``; ``"raw"`` uses ``Var(S_i) - mu_hat**2 nu2_hat``. Both
coincide when group sizes are constant. The centered form avoids the
``2 mu Cov(N, N alpha + sum eps)`` sampling noise of the raw difference,
which dominates the error of the variance components when ``mu`` is large.
"""
from __future__ import annotations

import numpy as np

from ..data import GroupedSample
from ..errors import InsufficientData, Unidentifiable
from ..moments import count_summary, grand_mean, group_sums, sample_var
from ..results import OneWayEstimate
from ._solve import clamped_solve

PIVOTS = ("centered", "raw")
_NAMES = ("sigma_a2", "sigma_e2")


def _precheck(sample: GroupedSample):
    if sample.r < 2:
        raise InsufficientData(f"need at least 2 groups, got {sample.r}")
    if sample.M < sample.r + 1:
        raise Unidentifiable("every group has a single response; sigma_e2 is not identifiable")


def _scale(y, mu):
    return float(np.var(y)) + mu * mu


def solve_one_way_moments(var_s, var_y, nu1, nu2, mu=0.0, scale=None):
    """Solve the one-way system from its moment inputs.

    ``var_s`` is the group-sum moment *before* the mean-structure term is
    removed (i.e. the raw pivot). Returns ``(values, raw, flags)`` for
    ``(sigma_a2, sigma_e2)``.
    """
    A = [[nu2 + nu1 ** 2, nu1], [1.0, 1.0]]
    b = [var_s - mu * mu * nu2, var_y]
    if scale is None:
        scale = abs(var_y) + abs(var_s)
    return clamped_solve(A, b, _NAMES, 1, scale, exc=Unidentifiable,
                         what="one-way moment system")


def estimate_one_way_fr(sample: GroupedSample, pivot: str = "centered") -> OneWayEstimate:
    """Method-of-moments fit treating the group sizes ``N_i`` as random.

    >>> est = estimate_one_way_fr(GroupedSample.from_groups([[0, 0], [2, 2]]))
    >>> round(est.sigma_a2, 12), est.sigma_e2, est.clamped["sigma_e2"]
    (1.333333333333, 0.0, True)
    """
    if pivot not in PIVOTS:
        raise ValueError(f"pivot must be one of {PIVOTS}")
    _precheck(sample)
    s = group_sums(sample)
    n = sample.counts.astype(float)
    mu = grand_mean(sample, s)
    cs = count_summary(sample)
    var_y = sample_var(sample.values)
    if pivot == "centered":
        lhs = sample_var(s - mu * n)
    else:
        lhs = sample_var(s) - mu * mu * cs.var
    A = [[cs.var + cs.mean ** 2, cs.mean], [1.0, 1.0]]
    x, raw, flags = clamped_solve(A, [lhs, var_y], _NAMES, 1, _scale(sample.values, mu),
                                  exc=Unidentifiable, what="one-way moment system")
    return OneWayEstimate(mu=mu, sigma_a2=float(x[0]), sigma_e2=float(x[1]),
                          nu1=cs.mean, nu2=cs.var, clamped=flags, raw=tuple(map(float, raw)))


def estimate_one_way_fixed(sample: GroupedSample, pivot: str = "centered") -> OneWayEstimate:
    """Method-of-moments fit treating the group sizes as fixed design constants.

    Equates the average of ``Y_i.**2`` to its fixed-design expectation
    ``mean(n_i**2 sigma_a2 + n_i sigma_e2 + (n_i mu)**2)``, with the mean
    term moved to the left and the same ``r/(r-1)`` small-sample factor the
    random-count fit gets from its unbiased variance. For constant ``n_i``
    this reproduces ``estimate_one_way_fr`` exactly.
    """
    if pivot not in PIVOTS:
        raise ValueError(f"pivot must be one of {PIVOTS}")
    _precheck(sample)
    r = sample.r
    s = group_sums(sample)
    n = sample.counts.astype(float)
    mu = grand_mean(sample, s)
    var_y = sample_var(sample.values)
    if pivot == "centered":
        d = s - mu * n
        lhs = float(np.dot(d, d)) / (r - 1)
    else:
        lhs = (float(np.dot(s, s)) - mu * mu * float(np.dot(n, n))) / (r - 1)
    A = [[float(np.mean(n * n)), float(np.mean(n))], [1.0, 1.0]]
    x, raw, flags = clamped_solve(A, [lhs, var_y], _NAMES, 1, _scale(sample.values, mu),
                                  exc=Unidentifiable, what="fixed-count moment system")
    return OneWayEstimate(mu=mu, sigma_a2=float(x[0]), sigma_e2=float(x[1]),
                          nu1=float(n.mean()), nu2=sample_var(n), clamped=flags,
                          raw=tuple(map(float, raw)))
