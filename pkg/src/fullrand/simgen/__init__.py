"""Seeded synthetic data with known ground truth."""
from .dists import Dist, effect, parse_count, parse_regressor
from .generate import (GENERATORS, SimSpec, gen_crossed, gen_famsize, gen_one_way,
                       gen_regression, generate)
from .rng import Stream

__all__ = ["Dist", "GENERATORS", "SimSpec", "Stream", "effect", "gen_crossed", "gen_famsize",
           "gen_one_way", "gen_regression", "generate", "parse_count", "parse_regressor"]
