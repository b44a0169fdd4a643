"""Fixed-knot spline approximation of sinusoid-modulated signals."""

__version__ = "0.1.0"

from .design import (DesignMatrix, TimeMap, basis_matrix, build_model1, build_model2,
                     interleave_blocks)
from .estimator import SplineWaveRegressor, SplineWaveSearch
from .fitter import FitResult, GridConfig, Signal, fit_fixed, grid_search
from .prototype import (Constant, PrototypeSamples, Sinusoid, Tabulated, count_zero_samples,
                        sample, sinusoid_zero_bound)
from .singularity import (SingularityVerdict, Status, Tolerances, analyze, numeric_rank,
                          theorem1_check, theorem2_check)
from .solvers import (LsqSolution, NormalEquationsError, dispatch_solve, solve_min_norm,
                      solve_normal_equations, solve_orthogonal)
from .spline import (IntervalAssignment, SplineSpec, TimeGrid, assign_intervals, eval_spline,
                     truncated_power)

__all__ = [
    "Constant", "DesignMatrix", "FitResult", "GridConfig", "IntervalAssignment",
    "LsqSolution", "NormalEquationsError", "PrototypeSamples", "Signal", "SingularityVerdict",
    "Sinusoid", "SplineSpec", "SplineWaveRegressor", "SplineWaveSearch", "Status",
    "Tabulated", "TimeGrid", "TimeMap", "Tolerances", "analyze", "assign_intervals",
    "basis_matrix", "build_model1", "build_model2", "count_zero_samples", "dispatch_solve",
    "eval_spline", "fit_fixed", "grid_search", "interleave_blocks", "numeric_rank", "sample",
    "sinusoid_zero_bound", "solve_min_norm", "solve_normal_equations", "solve_orthogonal",
    "theorem1_check", "theorem2_check", "truncated_power",
]
