"""Christoffel-weighted least squares with near-optimal random sampling budgets."""

from .estimator import (
    PIPELINES,
    Reconstruction,
    TrialParams,
    TrialReport,
    l2_error_sq,
    monte_carlo,
    run_trial,
    verify_worst_case_bound,
    weighted_least_squares,
)
from .gramian import (
    GramMatrix,
    discrete_norm_sq,
    gram,
    lambda_min,
    rhs_vector,
    solve_normal_equations,
    spectral_distance_to_identity,
)
from .sampling import RngStream, Sample, conditioned_sample, draw_iid, minimal_budget, sample_mu, sample_rho
from .spaces import (
    FunctionSpace,
    TargetFunction,
    basis_eval,
    best_approx_error,
    christoffel_weight,
    inner_product,
    make_target,
    sup_error_proxy,
)
from .sparsify import (
    PartitionResult,
    SplitSchedule,
    bss_sparsify,
    build_partition,
    build_schedule,
    greedy_removal,
    random_subsample,
    split_once,
)
from .targets import builtin_target

__version__ = "0.1.0"
