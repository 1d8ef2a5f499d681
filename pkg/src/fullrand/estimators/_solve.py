"""Linear moment-system solve with the nonnegativity (clamping) policy."""
from __future__ import annotations

import numpy as np

from ..errors import Singular

COND_LIMIT = 1e12
# negatives smaller than this (relative to the data scale) are rounding noise
SNAP_RTOL = 1e-12


def solve_checked(A, b, exc=Singular, what="moment system"):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise exc(f"{what} has non-finite entries")
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise exc(f"{what} is singular (condition number {cond:.3g})")
    return np.linalg.solve(A, b)


def _constrained_lstsq(A, b, total):
    """min ||A x - b|| subject to sum(x) = total."""
    k = A.shape[1]
    if k == 1:
        return np.array([total])
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = A.T @ A
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.concatenate([A.T @ b, [total]])
    return np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]


def clamped_solve(A, b, names, total_row, scale, exc=Singular, what="moment system"):
    """Solve ``A x = b`` for variance components, then enforce ``x >= 0``.

    Row ``total_row`` must be the total-variance equation (all coefficients
    one). While a component is negative the most negative one is fixed at
    zero and flagged; the rest are re-fitted so the total-variance equation
    holds exactly and the remaining equations hold in least squares.

    Returns ``(x, raw, flags)``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    raw = solve_checked(A, b, exc=exc, what=what)
    snap = SNAP_RTOL * max(scale, np.finfo(float).tiny)
    flags = {n: False for n in names}
    x = raw.copy()
    active = np.ones(len(names), dtype=bool)
    others = np.array([i for i in range(A.shape[0]) if i != total_row])
    total = b[total_row]
    while True:
        x[active & (x > -snap) & (x < 0)] = 0.0
        neg = active & (x < 0)
        if not neg.any():
            break
        worst = int(np.argmin(np.where(neg, x, np.inf)))
        active[worst] = False
        flags[names[worst]] = True
        x[worst] = 0.0
        if not active.any():
            break
        if total <= 0:
            x[active] = 0.0
            break
        sub = A[np.ix_(others, np.flatnonzero(active))]
        x[active] = _constrained_lstsq(sub, b[others], total)
    return x, raw, flags
