"""Seeded generators for every supported model.

Each random quantity lives in its own counter-based stream, addressed by
unit index (group, row, column or entry), so output depends only on the
spec and seed, never on how generation is split into blocks.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..data import GroupedSample, SparseRatings
from ..errors import BadSpec, DegenerateDraw
from .dists import Dist, effect, parse_count, parse_regressor
from .rng import Stream

MODELS = ("one_way", "famsize", "regression", "crossed")
CROSSED_MODES = ("bernoulli", "draws")
_MAX_ATTEMPTS = 1000

_PARAMS = {
    "one_way": ("mu", "sigma_a2", "sigma_e2"),
    "famsize": ("c1", "c2", "sigma_a2", "sigma_e2"),
    "regression": ("gamma", "sigma_a2", "sigma_e2"),
    "crossed": ("mu", "sigma_a2", "sigma_b2", "sigma_e2"),
}


@dataclass(frozen=True)
class SimSpec:
    """Generative description of a dataset.

    ``true_params`` holds the model's parameters; the effect distributions
    must reproduce its variances exactly (checked in closed form).
    """

    model: str
    true_params: dict
    r: int
    seed: int = 0
    c: int | None = None
    density: float | None = None
    count_dist: Dist | None = None
    alpha: Dist | None = None
    beta: Dist | None = None
    eps: Dist | None = None
    x_dists: tuple = ()
    row_x_dists: tuple = ()
    col_x_dists: tuple = ()
    crossed_mode: str = "bernoulli"
    resample_degenerate: bool = True

    def __post_init__(self):
        self.check()

    def check(self):
        if self.model not in MODELS:
            raise BadSpec(f"unknown model {self.model!r}; expected one of {MODELS}")
        missing = [k for k in _PARAMS[self.model] if k not in self.true_params]
        if missing:
            raise BadSpec(f"{self.model} needs true parameters {missing}")
        if int(self.r) < 1:
            raise BadSpec("r must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise BadSpec("seed must be a 64-bit unsigned integer")
        pairs = [("alpha", "sigma_a2"), ("eps", "sigma_e2")]
        if self.model == "crossed":
            pairs.append(("beta", "sigma_b2"))
            if self.c is None or int(self.c) < 1:
                raise BadSpec("crossed model needs c >= 1")
            if self.density is None or not 0 < self.density <= 1:
                raise BadSpec("density must lie in (0, 1]")
            if self.crossed_mode not in CROSSED_MODES:
                raise BadSpec(f"crossed_mode must be one of {CROSSED_MODES}")
            for feats, coef in ((self.row_x_dists, "row_gamma"), (self.col_x_dists, "col_eta")):
                if len(feats) != len(self.true_params.get(coef, ())):
                    raise BadSpec(f"{coef} length must match its regressor distributions")
        else:
            if self.count_dist is None or self.count_dist.kind != "count":
                raise BadSpec(f"{self.model} needs a count distribution")
        if self.model == "regression":
            if not self.x_dists:
                raise BadSpec("regression needs regressor distributions")
            if len(self.x_dists) != len(self.true_params["gamma"]):
                raise BadSpec("gamma length must match the number of regressors")
        for name, var in pairs:
            d = getattr(self, name)
            if d is None or d.kind != "effect":
                raise BadSpec(f"missing effect distribution {name!r}")
            if d.mean != 0.0:
                raise BadSpec(f"{name} distribution is not zero-mean")
            want = float(self.true_params[var])
            if not math.isclose(d.variance, want, rel_tol=1e-12, abs_tol=1e-300):
                raise BadSpec(f"{name} distribution has variance {d.variance!r}, "
                              f"but {var} = {want!r}")

    # convenience constructors -------------------------------------------
    @classmethod
    def one_way(cls, mu=10.0, sigma_a2=4.0, sigma_e2=1.0, r=2000, count="poisson:4",
                seed=0, alpha="normal", eps="normal", gamma_shape=2.0):
        return cls("one_way", {"mu": mu, "sigma_a2": sigma_a2, "sigma_e2": sigma_e2}, r,
                   seed=seed, count_dist=_count(count),
                   alpha=effect(alpha, sigma_a2, gamma_shape),
                   eps=effect(eps, sigma_e2, gamma_shape))

    @classmethod
    def famsize(cls, c1=1.0, c2=-0.1, sigma_a2=1.0, sigma_e2=1.0, r=5000, count="poisson:3",
                seed=0, alpha="normal", eps="normal", gamma_shape=2.0):
        return cls("famsize", {"c1": c1, "c2": c2, "sigma_a2": sigma_a2, "sigma_e2": sigma_e2},
                   r, seed=seed, count_dist=_count(count),
                   alpha=effect(alpha, sigma_a2, gamma_shape),
                   eps=effect(eps, sigma_e2, gamma_shape))

    @classmethod
    def regression(cls, gamma=(5.0, 1.5), x=("1", "normal:0:1"), sigma_a2=2.0, sigma_e2=1.0,
                   r=3000, count="poisson:4", seed=0, alpha="normal", eps="normal",
                   gamma_shape=2.0):
        xd = tuple(parse_regressor(t) if isinstance(t, str) else t for t in x)
        return cls("regression", {"gamma": [float(g) for g in gamma], "sigma_a2": sigma_a2,
                                  "sigma_e2": sigma_e2},
                   r, seed=seed, count_dist=_count(count), x_dists=xd,
                   alpha=effect(alpha, sigma_a2, gamma_shape),
                   eps=effect(eps, sigma_e2, gamma_shape))

    @classmethod
    def crossed(cls, mu=3.0, sigma_a2=1.0, sigma_b2=0.5, sigma_e2=1.0, r=500, c=500,
                density=0.05, seed=0, alpha="normal", beta="normal", eps="normal",
                gamma_shape=2.0, mode="bernoulli", row_x=(), row_gamma=(), col_x=(),
                col_eta=()):
        params = {"mu": mu, "sigma_a2": sigma_a2, "sigma_b2": sigma_b2, "sigma_e2": sigma_e2}
        if row_x:
            params["row_gamma"] = [float(v) for v in row_gamma]
        if col_x:
            params["col_eta"] = [float(v) for v in col_eta]
        return cls("crossed", params, r, seed=seed, c=c, density=density,
                   alpha=effect(alpha, sigma_a2, gamma_shape),
                   beta=effect(beta, sigma_b2, gamma_shape),
                   eps=effect(eps, sigma_e2, gamma_shape), crossed_mode=mode,
                   row_x_dists=tuple(parse_regressor(t) if isinstance(t, str) else t
                                     for t in row_x),
                   col_x_dists=tuple(parse_regressor(t) if isinstance(t, str) else t
                                     for t in col_x))

    def with_seed(self, seed: int) -> "SimSpec":
        return replace(self, seed=int(seed))

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"model": self.model, "true_params": self.true_params, "r": self.r,
             "seed": self.seed}
        for k in ("c", "density"):
            if getattr(self, k) is not None:
                d[k] = getattr(self, k)
        for k in ("count_dist", "alpha", "beta", "eps"):
            if getattr(self, k) is not None:
                d[k] = getattr(self, k).to_dict()
        for k in ("x_dists", "row_x_dists", "col_x_dists"):
            if getattr(self, k):
                d[k] = [x.to_dict() for x in getattr(self, k)]
        if self.model == "crossed":
            d["crossed_mode"] = self.crossed_mode
            d["resample_degenerate"] = self.resample_degenerate
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        d = dict(d)
        try:
            kw = {"model": d.pop("model"), "true_params": d.pop("true_params"),
                  "r": int(d.pop("r"))}
        except KeyError as e:
            raise BadSpec(f"spec is missing {e.args[0]!r}") from None
        if "count_dist" in d:
            kw["count_dist"] = Dist.from_dict(d.pop("count_dist"), "count")
        for k in ("alpha", "beta", "eps"):
            if k in d:
                kw[k] = Dist.from_dict(d.pop(k), "effect")
        for k in ("x_dists", "row_x_dists", "col_x_dists"):
            if k in d:
                kw[k] = tuple(Dist.from_dict(x, "regressor") for x in d.pop(k))
        for k in ("seed", "c"):
            if k in d:
                kw[k] = int(d.pop(k))
        for k in ("density", "crossed_mode", "resample_degenerate"):
            if k in d:
                kw[k] = d.pop(k)
        if d:
            raise BadSpec(f"unknown spec fields {sorted(d)}")
        return cls(**kw)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "SimSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise BadSpec(f"spec is not valid JSON: {e}") from None


def _count(c) -> Dist:
    return parse_count(c) if isinstance(c, str) else c


def _blocks(n: int, blocks: int):
    blocks = max(1, min(int(blocks), n))
    edges = np.linspace(0, n, blocks + 1).astype(np.int64)
    return list(zip(edges[:-1], edges[1:]))


def _run_blocks(fn, spans, workers):
    if workers and workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda s: fn(*s), spans))
    return [fn(*s) for s in spans]


def _grouped(spec: SimSpec, mean_fn, x=None, blocks=1, workers=1):
    r = spec.r
    counts = spec.count_dist.ppf(Stream(spec.seed, "count").uniforms(0, r)).astype(np.int64)
    off = np.concatenate(([0], np.cumsum(counts)))
    s_alpha = Stream(spec.seed, "alpha")
    s_eps = Stream(spec.seed, "eps")

    def block(i0, i1):
        n = counts[i0:i1]
        a = spec.alpha.ppf(s_alpha.uniforms(i0, i1 - i0))
        e = spec.eps.ppf(s_eps.uniforms(off[i0], off[i1] - off[i0]))
        m = mean_fn(i0, i1, n)
        g = np.repeat(np.arange(i1 - i0), n)
        return (m + a)[g] + e

    parts = _run_blocks(block, _blocks(r, blocks), workers)
    return GroupedSample(np.concatenate(parts), counts, regressors=x)


def gen_one_way(spec: SimSpec, blocks: int = 1, workers: int = 1) -> GroupedSample:
    """``Y_ij = mu + alpha_i + eps_ij`` with ``N_i`` drawn from the count distribution."""
    if spec.model != "one_way":
        raise BadSpec(f"gen_one_way got a {spec.model} spec")
    mu = float(spec.true_params["mu"])
    return _grouped(spec, lambda i0, i1, n: np.full(i1 - i0, mu), blocks=blocks,
                    workers=workers)


def gen_famsize(spec: SimSpec, blocks: int = 1, workers: int = 1) -> GroupedSample:
    """``Y_ij = c1 + c2 N_i + alpha_i + eps_ij``."""
    if spec.model != "famsize":
        raise BadSpec(f"gen_famsize got a {spec.model} spec")
    c1 = float(spec.true_params["c1"])
    c2 = float(spec.true_params["c2"])
    return _grouped(spec, lambda i0, i1, n: c1 + c2 * n, blocks=blocks, workers=workers)


def _features(seed, prefix, dists, n):
    if not dists:
        return None
    return np.column_stack([d.ppf(Stream(seed, f"{prefix}{k}").uniforms(0, n))
                            for k, d in enumerate(dists)])


def gen_regression(spec: SimSpec, x_dist=None, blocks: int = 1,
                   workers: int = 1) -> GroupedSample:
    """``Y_ij = X_i' gamma + alpha_i + eps_ij`` with i.i.d. group regressors.

    ``x_dist`` (a sequence of per-component ``Dist``) overrides
    ``spec.x_dists``.
    """
    if spec.model != "regression":
        raise BadSpec(f"gen_regression got a {spec.model} spec")
    if x_dist is not None:
        spec = replace(spec, x_dists=tuple(x_dist))
    gamma = np.asarray(spec.true_params["gamma"], dtype=float)
    X = _features(spec.seed, "x", spec.x_dists, spec.r)
    fitted = X @ gamma
    return _grouped(spec, lambda i0, i1, n: fitted[i0:i1], x=X, blocks=blocks, workers=workers)


def _crossed_attempt(spec: SimSpec, attempt: int, blocks: int, workers: int):
    r, c, seed = spec.r, spec.c, spec.seed
    a = spec.alpha.ppf(Stream(seed, "alpha", attempt).uniforms(0, r))
    b = spec.beta.ppf(Stream(seed, "beta", attempt).uniforms(0, c))
    U = _features(seed, "u", spec.row_x_dists, r)
    V = _features(seed, "v", spec.col_x_dists, c)
    row_mean = a.copy()
    col_mean = b.copy()
    if U is not None:
        row_mean = row_mean + U @ np.asarray(spec.true_params["row_gamma"], float)
    if V is not None:
        col_mean = col_mean + V @ np.asarray(spec.true_params["col_eta"], float)
    mu = float(spec.true_params["mu"])
    s_eps = Stream(seed, "eps", attempt)
    collapsed = 0

    if spec.crossed_mode == "bernoulli":
        s_z = Stream(seed, "z", attempt)

        def zblock(i0, i1):
            z = s_z.uniforms(i0 * c, (i1 - i0) * c).reshape(i1 - i0, c) < spec.density
            ii, jj = np.nonzero(z)
            return ii + i0, jj

        parts = _run_blocks(zblock, _blocks(r, blocks), workers)
        rows = np.concatenate([p[0] for p in parts])
        cols = np.concatenate([p[1] for p in parts])
        n = rows.size
        eps = spec.eps.ppf(s_eps.uniforms(0, n))
        arrival_keys = Stream(seed, "arrival", attempt).uniforms(0, n)
        arrival = np.argsort(arrival_keys, kind="stable")
    else:
        n_draws = int(round(spec.density * r * c))
        I = np.minimum((Stream(seed, "I", attempt).uniforms(0, n_draws) * r).astype(np.int64), r - 1)
        J = np.minimum((Stream(seed, "J", attempt).uniforms(0, n_draws) * c).astype(np.int64), c - 1)
        e_all = spec.eps.ppf(s_eps.uniforms(0, n_draws))
        key = I * c + J
        # keep the last submission of each cell
        rev_keys, rev_first = np.unique(key[::-1], return_index=True)
        last = n_draws - 1 - rev_first
        collapsed = n_draws - last.size
        rows, cols = rev_keys // c, rev_keys % c
        eps = e_all[last]
        arrival = np.argsort(last, kind="stable")
        n = rows.size

    y = mu + row_mean[rows] + col_mean[cols] + eps
    return SparseRatings(r, c, rows, cols, y, arrival_order=arrival, row_features=U,
                         col_features=V, collapsed_duplicates=collapsed), n


def gen_crossed(spec: SimSpec, blocks: int = 1, workers: int = 1) -> SparseRatings:
    """``Y_ij = mu + alpha_i + beta_j + eps_ij`` on a random sparse grid.

    In ``bernoulli`` mode each cell is observed independently with probability
    ``density`` and ``arrival_order`` is a seeded uniform shuffle. In
    ``draws`` mode ``round(density * r * c)`` submissions pick row and column
    uniformly with replacement; a cell drawn twice keeps its last value
    (counted in ``collapsed_duplicates``) and arrival follows submission
    time. A draw with no entries is redrawn when ``spec.resample_degenerate``
    is set, else raises ``DegenerateDraw``.
    """
    if spec.model != "crossed":
        raise BadSpec(f"gen_crossed got a {spec.model} spec")
    for attempt in range(_MAX_ATTEMPTS):
        data, n = _crossed_attempt(spec, attempt, blocks, workers)
        if n > 0:
            return data
        if not spec.resample_degenerate:
            raise DegenerateDraw("no cells were drawn")
    raise DegenerateDraw(f"no cells drawn in {_MAX_ATTEMPTS} attempts")


GENERATORS = {"one_way": gen_one_way, "famsize": gen_famsize,
              "regression": gen_regression, "crossed": gen_crossed}


def generate(spec: SimSpec, **kw):
    return GENERATORS[spec.model](spec, **kw)
