"""Estimate containers returned by the estimators and by Software Alchemy."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = ["OneWayEstimate", "FamSizeEstimate", "CrossedEstimate",
           "RegressionEstimate", "AlchemyResult"]


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


class _Estimate:
    param_names: tuple[str, ...] = ()

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.param_names], dtype=float)

    def to_dict(self) -> dict:
        return _plain(asdict(self))


@dataclass(frozen=True)
class OneWayEstimate(_Estimate):
    mu: float
    sigma_a2: float
    sigma_e2: float
    nu1: float
    nu2: float
    clamped: dict = field(default_factory=lambda: {"sigma_a2": False, "sigma_e2": False})
    raw: tuple = ()  # pre-clamp (sigma_a2, sigma_e2)

    param_names = ("mu", "sigma_a2", "sigma_e2", "nu1", "nu2")


@dataclass(frozen=True)
class FamSizeEstimate(_Estimate):
    c1: float
    c2: float
    sigma_a2: float
    sigma_e2: float
    n_moments: tuple
    iterations: int
    converged: bool
    residual_norm: float
    clamped: dict = field(default_factory=lambda: {"sigma_a2": False, "sigma_e2": False})
    raw: tuple = ()

    param_names = ("c1", "c2", "sigma_a2", "sigma_e2")


@dataclass(frozen=True)
class CrossedEstimate(_Estimate):
    mu: float
    sigma_a2: float
    sigma_b2: float
    sigma_e2: float
    row_count_moments: tuple
    col_count_moments: tuple
    clamped: dict = field(default_factory=lambda: {"sigma_a2": False, "sigma_b2": False,
                                                   "sigma_e2": False})
    raw: tuple = ()
    moments: tuple = ()  # (row pivot, column pivot, Var(Y)) left-hand sides

    param_names = ("mu", "sigma_a2", "sigma_b2", "sigma_e2")


@dataclass(frozen=True)
class RegressionEstimate(_Estimate):
    gamma: np.ndarray
    sigma_a2: float
    sigma_e2: float
    residual_summary: dict
    clamped: dict = field(default_factory=lambda: {"sigma_a2": False, "sigma_e2": False})
    raw: tuple = ()

    @property
    def param_names(self):
        return tuple(f"gamma{k + 1}" for k in range(len(self.gamma))) + ("sigma_a2", "sigma_e2")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.gamma, float), [self.sigma_a2, self.sigma_e2]])


@dataclass(frozen=True)
class AlchemyResult:
    g: int
    param_names: tuple
    per_chunk: np.ndarray  # (g, k)
    theta_bar: np.ndarray
    emp_cov: np.ndarray | None
    std_errors: np.ndarray | None
    clamp_counts: dict
    chunk_estimates: tuple = ()

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("g", "param_names", "per_chunk", "theta_bar",
                                           "emp_cov", "std_errors", "clamp_counts")}
        return _plain(d)
