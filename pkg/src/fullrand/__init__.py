"""Method-of-moments variance components under full randomness.

Group sizes, regressors and crossed-design inclusion indicators are treated
as random, which keeps the moment equations short and makes the data
i.i.d. at the unit level, so estimation can be split into chunks
(Software Alchemy) and averaged.
"""
__version__ = "0.1.0"

from .alchemy import ChunkPlan, alchemy_estimate, make_chunks, make_stream_chunks
from .data import Group, GroupedSample, SparseRatings, validate
from .estimators import (OverlapDistribution, SolverOptions, estimate_crossed,
                         estimate_famsize, estimate_one_way_fixed, estimate_one_way_fr,
                         estimate_with_regressors, overlap_distribution, row_cov_diagnostic)
from .moments import MomentSummary, count_summary, grand_mean, group_sums, summarize
from .results import (AlchemyResult, CrossedEstimate, FamSizeEstimate, OneWayEstimate,
                      RegressionEstimate)
from .simgen import SimSpec, gen_crossed, gen_famsize, gen_one_way, gen_regression

__all__ = [
    "AlchemyResult", "ChunkPlan", "CrossedEstimate", "FamSizeEstimate", "Group",
    "GroupedSample", "MomentSummary", "OneWayEstimate", "OverlapDistribution",
    "RegressionEstimate", "SimSpec", "SolverOptions", "SparseRatings", "alchemy_estimate",
    "count_summary", "estimate_crossed", "estimate_famsize", "estimate_one_way_fixed",
    "estimate_one_way_fr", "estimate_with_regressors", "gen_crossed", "gen_famsize",
    "gen_one_way", "gen_regression", "grand_mean", "group_sums", "make_chunks",
    "make_stream_chunks", "overlap_distribution", "row_cov_diagnostic", "summarize",
    "validate",
]
