"""Method-of-moments estimators for the supported model families."""
from .crossed import (CovDiagnostic, OverlapDistribution, crossed_moments, estimate_crossed,
                      overlap_distribution, row_cov_diagnostic, sample_pairs)
from .famsize import SolverOptions, estimate_famsize, famsize_step
from .oneway import estimate_one_way_fixed, estimate_one_way_fr, solve_one_way_moments
from .regression import estimate_with_regressors

ESTIMATORS = {
    "one-way": estimate_one_way_fr,
    "one-way-fixed": estimate_one_way_fixed,
    "famsize": estimate_famsize,
    "regression": estimate_with_regressors,
    "crossed": estimate_crossed,
}

__all__ = ["CovDiagnostic", "OverlapDistribution", "SolverOptions", "ESTIMATORS",
           "crossed_moments", "estimate_crossed", "estimate_famsize", "estimate_one_way_fixed",
           "estimate_one_way_fr", "estimate_with_regressors", "famsize_step",
           "overlap_distribution", "row_cov_diagnostic", "sample_pairs",
           "solve_one_way_moments"]
