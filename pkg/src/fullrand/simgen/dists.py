"""Named distributions sampled by inverse CDF from counter-based uniforms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ..errors import BadSpec

EFFECT_FAMILIES = ("normal", "gamma", "uniform")
COUNT_FAMILIES = ("shifted_poisson", "uniform_int", "constant")
REGRESSOR_FAMILIES = ("constant", "normal", "uniform")

_REQUIRED = {
    ("effect", "normal"): ("sd",),
    ("effect", "gamma"): ("shape", "scale"),
    ("effect", "uniform"): ("width",),
    ("count", "shifted_poisson"): ("lam",),
    ("count", "uniform_int"): ("low", "high"),
    ("count", "constant"): ("n",),
    ("regressor", "constant"): ("value",),
    ("regressor", "normal"): ("mean", "sd"),
    ("regressor", "uniform"): ("low", "high"),
}


@dataclass(frozen=True)
class Dist:
    """A distribution with closed-form mean and variance.

    Effect families are centred so their mean is zero:

    - ``normal``: ``sd``
    - ``gamma``: ``shape``, ``scale`` (shifted by ``-shape * scale``)
    - ``uniform``: ``width`` (on ``[-width/2, width/2]``)

    Count families (support >= 1): ``shifted_poisson`` (``lam``; ``1 + Poisson``),
    ``uniform_int`` (``low``, ``high`` inclusive), ``constant`` (``n``).

    Regressor components: ``constant`` (``value``), ``normal`` (``mean``,
    ``sd``), ``uniform`` (``low``, ``high``).
    """

    family: str
    params: dict = field(default_factory=dict)
    kind: str = "effect"

    def __post_init__(self):
        key = (self.kind, self.family)
        if key not in _REQUIRED:
            raise BadSpec(f"unknown {self.kind} distribution {self.family!r}")
        missing = [k for k in _REQUIRED[key] if k not in self.params]
        if missing:
            raise BadSpec(f"{self.family} needs parameters {missing}")
        p = self.params
        if self.kind == "effect":
            if any(p[k] < 0 for k in _REQUIRED[key]):
                raise BadSpec(f"{self.family} parameters must be nonnegative")
            if self.family == "gamma" and p["shape"] <= 0:
                raise BadSpec("gamma shape must be positive")
        elif self.kind == "count":
            if self.family == "shifted_poisson" and p["lam"] < 0:
                raise BadSpec("Poisson rate must be nonnegative")
            if self.family == "uniform_int" and not 1 <= p["low"] <= p["high"]:
                raise BadSpec("count support must be >= 1 (need 1 <= low <= high)")
            if self.family == "constant" and p["n"] < 1:
                raise BadSpec("count support must be >= 1")
        elif self.family == "uniform" and p["high"] < p["low"]:
            raise BadSpec("uniform needs low <= high")

    @property
    def mean(self) -> float:
        p, f = self.params, self.family
        if self.kind == "effect":
            return 0.0
        if f == "shifted_poisson":
            return 1.0 + p["lam"]
        if f in ("uniform_int", "uniform"):
            return (p["low"] + p["high"]) / 2.0
        if f == "constant":
            return float(p["n"] if self.kind == "count" else p["value"])
        return float(p["mean"])

    @property
    def variance(self) -> float:
        p, f = self.params, self.family
        if f == "normal":
            return float(p["sd"]) ** 2
        if f == "gamma":
            return float(p["shape"]) * float(p["scale"]) ** 2
        if f == "uniform":
            if self.kind == "effect":
                return float(p["width"]) ** 2 / 12.0
            return (p["high"] - p["low"]) ** 2 / 12.0
        if f == "shifted_poisson":
            return float(p["lam"])
        if f == "uniform_int":
            k = p["high"] - p["low"] + 1
            return (k * k - 1) / 12.0
        return 0.0

    def ppf(self, u: np.ndarray) -> np.ndarray:
        """Quantile function applied to uniforms ``u``."""
        p, f = self.params, self.family
        if self.kind == "effect":
            if f == "normal":
                return p["sd"] * special.ndtri(u)
            if f == "gamma":
                return p["scale"] * (special.gammaincinv(p["shape"], u) - p["shape"])
            return (u - 0.5) * p["width"]
        if self.kind == "count":
            if f == "shifted_poisson":
                if p["lam"] == 0:
                    return np.ones(u.shape, dtype=np.int64)
                return 1 + stats.poisson.ppf(u, p["lam"]).astype(np.int64)
            if f == "uniform_int":
                k = p["high"] - p["low"] + 1
                return p["low"] + np.minimum(np.floor(u * k), k - 1).astype(np.int64)
            return np.full(u.shape, int(p["n"]), dtype=np.int64)
        if f == "constant":
            return np.full(u.shape, float(p["value"]))
        if f == "normal":
            return p["mean"] + p["sd"] * special.ndtri(u)
        return p["low"] + u * (p["high"] - p["low"])

    def to_dict(self) -> dict:
        return {"family": self.family, **self.params}

    @classmethod
    def from_dict(cls, d: dict, kind: str = "effect") -> "Dist":
        d = dict(d)
        try:
            fam = d.pop("family")
        except KeyError:
            raise BadSpec(f"distribution entry {d!r} has no 'family'") from None
        return cls(fam, d, kind)


def effect(family: str, variance: float, shape: float = 2.0) -> Dist:
    """Zero-mean effect distribution of ``family`` with the given variance.

    ``shape`` only applies to ``gamma``.
    """
    if variance < 0:
        raise BadSpec("variance must be nonnegative")
    if family == "normal":
        return Dist("normal", {"sd": float(np.sqrt(variance))})
    if family == "gamma":
        return Dist("gamma", {"shape": float(shape), "scale": float(np.sqrt(variance / shape))})
    if family == "uniform":
        return Dist("uniform", {"width": float(np.sqrt(12.0 * variance))})
    raise BadSpec(f"unknown effect distribution {family!r}")


def parse_count(text: str) -> Dist:
    """Parse ``poisson:LAM`` (1 + Poisson), ``uniform:LOW:HIGH`` or ``const:N``."""
    parts = text.split(":")
    try:
        if parts[0] == "poisson" and len(parts) == 2:
            return Dist("shifted_poisson", {"lam": float(parts[1])}, "count")
        if parts[0] == "uniform" and len(parts) == 3:
            return Dist("uniform_int", {"low": int(parts[1]), "high": int(parts[2])}, "count")
        if parts[0] in ("const", "constant") and len(parts) == 2:
            return Dist("constant", {"n": int(parts[1])}, "count")
    except ValueError as e:
        raise BadSpec(f"bad count distribution {text!r}: {e}") from None
    raise BadSpec(f"bad count distribution {text!r}")


def parse_regressor(text: str) -> Dist:
    """Parse ``V`` / ``const:V``, ``normal:MEAN:SD`` or ``uniform:LOW:HIGH``."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return Dist("constant", {"value": float(parts[0])}, "regressor")
        if parts[0] in ("const", "constant") and len(parts) == 2:
            return Dist("constant", {"value": float(parts[1])}, "regressor")
        if parts[0] == "normal" and len(parts) == 3:
            return Dist("normal", {"mean": float(parts[1]), "sd": float(parts[2])}, "regressor")
        if parts[0] == "uniform" and len(parts) == 3:
            return Dist("uniform", {"low": float(parts[1]), "high": float(parts[2])}, "regressor")
    except ValueError as e:
        raise BadSpec(f"bad regressor distribution {text!r}: {e}") from None
    raise BadSpec(f"bad regressor distribution {text!r}")
