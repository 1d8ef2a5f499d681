"""Count-as-covariate model ``Y_ij = c1 + c2 N_i + alpha_i + eps_ij``.

The group-sum mean ``c1 N + c2 N**2`` makes the moment equations nonlinear
in the parameters. Rather than expanding ``Var(c1 N + c2 N**2)`` through the
third and fourth moments of ``N``, each iteration plugs in the sample
variance of ``c1 N_i + c2 N_i**2`` at the current coefficients and solves
the remaining equations, which are linear:

    Var(S) - Var(c1 N + c2 N^2) = E[N^2] sigma_a2 + E[N] sigma_e2
    Var(Y) - Var_obs(c1 + c2 N)  = sigma_a2 + sigma_e2

The coefficient update is the N-weighted least-squares fit of group means on
``(1, N_i)``, i.e. every observation counts once.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..data import GroupedSample
from ..errors import InsufficientData, NotConvergedWarning, Unidentifiable
from ..moments import count_summary, group_sums, sample_var
from ..results import FamSizeEstimate
from ._solve import clamped_solve
from .oneway import estimate_one_way_fr

_NAMES = ("sigma_a2", "sigma_e2")


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 500
    init: tuple | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


class _Prepared:
    """Quantities that do not change across iterations."""

    def __init__(self, sample: GroupedSample):
        self.sample = sample
        self.n = sample.counts.astype(float)
        self.s = group_sums(sample)
        self.ybar = self.s / self.n
        self.design = np.column_stack([np.ones_like(self.n), self.n])
        self.cs = count_summary(sample, order=4)
        self.en2 = self.cs.var + self.cs.mean ** 2
        self.var_s = sample_var(self.s)
        self.var_y = sample_var(sample.values)
        self.scale = float(np.var(sample.values)) + float(np.mean(sample.values)) ** 2
        w = self.n
        self.wx = self.design * w[:, None]
        self.gram = self.design.T @ self.wx


def _wls(prep: _Prepared) -> np.ndarray:
    return np.linalg.solve(prep.gram, prep.wx.T @ prep.ybar)


def _plugins(prep: _Prepared, c) -> tuple[float, float]:
    m = c[0] * prep.n + c[1] * prep.n ** 2
    f = c[0] + c[1] * prep.n
    # Var over observations of the fitted mean: groups weighted by N_i
    fbar = np.dot(prep.n, f) / prep.sample.M
    var_f = float(np.dot(prep.n, (f - fbar) ** 2) / (prep.sample.M - 1))
    return sample_var(m), var_f


def _variance_step(prep: _Prepared, c):
    vm, vf = _plugins(prep, c)
    A = [[prep.en2, prep.cs.mean], [1.0, 1.0]]
    b = [prep.var_s - vm, prep.var_y - vf]
    return clamped_solve(A, b, _NAMES, 1, prep.scale, exc=Unidentifiable,
                         what="famsize variance system")


def _residual(prep: _Prepared, c, raw) -> float:
    """Norm of all moment-equation residuals at ``(c, raw variances)``."""
    mean_eq = (prep.wx.T @ (prep.ybar - prep.design @ c)) / prep.sample.M
    vm, vf = _plugins(prep, c)
    r1 = prep.var_s - vm - (prep.en2 * raw[0] + prep.cs.mean * raw[1])
    r2 = prep.var_y - vf - (raw[0] + raw[1])
    return float(np.linalg.norm(np.concatenate([mean_eq, [r1, r2]])))


def famsize_step(sample: GroupedSample, c, _prep=None):
    """One block iteration from coefficients ``c``.

    Returns ``(c_new, variances, raw_variances, flags)``. Exposed so a
    converged solution can be checked as a fixed point.
    """
    prep = _prep if _prep is not None else _Prepared(sample)
    c_new = _wls(prep)
    x, raw, flags = _variance_step(prep, c_new)
    return c_new, x, raw, flags


def estimate_famsize(sample: GroupedSample, opts: SolverOptions | None = None) -> FamSizeEstimate:
    """Iterative moment fit of the count-as-covariate model.

    Raises ``Unidentifiable`` when the group sizes do not vary. Hitting
    ``opts.max_iter`` returns the last iterate with ``converged=False`` and
    emits ``NotConvergedWarning``.
    """
    opts = opts or SolverOptions()
    if sample.r < 3:
        raise InsufficientData(f"need at least 3 groups, got {sample.r}")
    prep = _Prepared(sample)
    if prep.cs.var <= 0:
        raise Unidentifiable("group sizes are constant; c1 and c2 are confounded")
    if sample.M < sample.r + 1:
        raise Unidentifiable("every group has a single response; sigma_e2 is not identifiable")

    if opts.init is not None:
        c = np.asarray(opts.init, dtype=float)
    else:
        c = np.linalg.lstsq(prep.design, prep.ybar, rcond=None)[0]
    start = estimate_one_way_fr(sample)
    theta = np.concatenate([c, start.raw])

    converged = False
    it = 0
    resid = np.inf
    x, raw, flags = np.array([start.sigma_a2, start.sigma_e2]), np.array(start.raw), start.clamped
    for it in range(1, opts.max_iter + 1):
        c, x, raw, flags = famsize_step(sample, c, _prep=prep)
        new = np.concatenate([c, raw])
        move = float(np.max(np.abs(new - theta)))
        theta = new
        resid = _residual(prep, c, raw)
        if move < opts.tol and resid < opts.tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"famsize solver stopped after {it} iterations "
                      f"(residual {resid:.3g})", NotConvergedWarning, stacklevel=2)
    cs = prep.cs
    return FamSizeEstimate(c1=float(c[0]), c2=float(c[1]), sigma_a2=float(x[0]),
                           sigma_e2=float(x[1]),
                           n_moments=(cs.mean, cs.var, cs.central3, cs.central4),
                           iterations=it, converged=converged, residual_norm=resid,
                           clamped=flags, raw=tuple(map(float, raw)))
