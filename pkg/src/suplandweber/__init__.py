"""Superiorized Landweber iteration for linear ill-posed inverse problems.

The basic Landweber update x <- x - lam * A*(A x - y) is interleaved with
bounded, summably scaled perturbations that push each iterate toward smaller
values of a convex regularizer. The package provides the iteration, the
perturbation maps, stopping rules for noisy data, independent reference
solvers for validation, and a benchmark CLI.

The hot iteration loop runs in a compiled extension when available and in a
numpy fallback otherwise; see :mod:`suplandweber.backend`.
"""

from .backend import COMPILED_AVAILABLE, active_name as backend_name
from .iterate import (IterationConfig, IterationState, References,
                      StepSequence, default_lambda, landweber_step,
                      run_iteration, superiorized_step)
from .linops import (ConvolutionOperator1D, DenseMatrixOperator,
                     DimensionMismatch, LinearOperator, NormEstimate,
                     estimate_norm, inflated_norm)
from .problems import (NoiseSpec, Problem, ProblemSpec, generate_problem,
                       inject_noise, load_problem, save_problem)
from .records import CSV_COLUMNS, ExperimentRecord, StopInfo, emit, load_record
from .reference import (RMinResult, SvdFactorization, jacobi_svd,
                        pseudoinverse_solve, r_min_solve)
from .regularizers import PerturbationMap, Regularizer
from .stopping import StoppingRule, apriori_index, discrepancy_fired
from .sweep import exact_limit, run_delta_sweep

__version__ = "0.1.0"

__all__ = [
    "COMPILED_AVAILABLE", "backend_name",
    "IterationConfig", "IterationState", "References", "StepSequence",
    "default_lambda", "landweber_step", "run_iteration", "superiorized_step",
    "ConvolutionOperator1D", "DenseMatrixOperator", "DimensionMismatch",
    "LinearOperator", "NormEstimate", "estimate_norm", "inflated_norm",
    "NoiseSpec", "Problem", "ProblemSpec", "generate_problem", "inject_noise",
    "load_problem", "save_problem",
    "CSV_COLUMNS", "ExperimentRecord", "StopInfo", "emit", "load_record",
    "RMinResult", "SvdFactorization", "jacobi_svd", "pseudoinverse_solve",
    "r_min_solve",
    "PerturbationMap", "Regularizer",
    "StoppingRule", "apriori_index", "discrepancy_fired",
    "exact_limit", "run_delta_sweep",
]
