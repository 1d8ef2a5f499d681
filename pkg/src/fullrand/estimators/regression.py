"""One-way model with group-level random regressors, ``Y_ij = X_i' gamma + alpha_i + eps_ij``."""
from __future__ import annotations

import numpy as np

from ..data import GroupedSample
from ..errors import InsufficientData, RankDeficient, Unidentifiable
from ..moments import count_summary, group_sums, sample_var
from ..results import RegressionEstimate
from ._solve import clamped_solve


def estimate_with_regressors(sample: GroupedSample) -> RegressionEstimate:
    """Fit ``gamma`` by pooled least squares, then the variance components on residuals.

    ``E[Y_ij] = X_i' gamma`` lets gamma be estimated on its own. The residuals
    then follow the one-way model with zero mean, so the group-sum equation
    loses its mean-structure term.
    """
    if sample.regressors is None:
        raise InsufficientData("sample carries no regressors")
    if sample.r < 2:
        raise InsufficientData(f"need at least 2 groups, got {sample.r}")
    if sample.M < sample.r + 1:
        raise Unidentifiable("every group has a single response; sigma_e2 is not identifiable")
    X = sample.regressors
    n = sample.counts.astype(float)
    p = X.shape[1]
    # pooled OLS over observations == N-weighted LS on group rows
    xw = X * np.sqrt(n)[:, None]
    if np.linalg.matrix_rank(xw) < p:
        raise RankDeficient(f"regressor matrix has rank < {p}")
    s = group_sums(sample)
    gamma = np.linalg.solve(X.T @ (X * n[:, None]), X.T @ s)

    fitted = X @ gamma
    resid = sample.values - np.repeat(fitted, sample.counts)
    rs = s - n * fitted
    cs = count_summary(sample)
    var_rs = sample_var(rs)
    var_e = sample_var(resid)
    A = [[cs.var + cs.mean ** 2, cs.mean], [1.0, 1.0]]
    scale = float(np.var(sample.values)) + float(np.mean(sample.values)) ** 2
    x, raw, flags = clamped_solve(A, [var_rs, var_e], ("sigma_a2", "sigma_e2"), 1, scale,
                                  exc=Unidentifiable, what="regression moment system")
    summary = {"r": sample.r, "M": sample.M, "nu1": cs.mean, "nu2": cs.var,
               "resid_mean": float(resid.mean()), "resid_var": var_e,
               "resid_sum_var": var_rs}
    return RegressionEstimate(gamma=gamma, sigma_a2=float(x[0]), sigma_e2=float(x[1]),
                              residual_summary=summary, clamped=flags,
                              raw=tuple(map(float, raw)))
