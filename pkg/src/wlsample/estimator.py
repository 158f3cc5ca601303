"""Weighted least-squares reconstruction and the Monte Carlo harness."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .errors import (
    ConditioningFailureError,
    HarnessError,
    ParameterError,
    PreconditionError,
    ReconstructionFailure,
    SparsificationFailure,
    SplitSearchFailure,
)
from .gramian import SINGULAR_TOL, eigvalsh, gram, lambda_min, rhs_vector, solve_normal_equations
from .sampling import RngStream, conditioned_sample, draw_iid, minimal_budget
from .spaces import best_approx_error_sq, coefficients, norm_sq, sup_error_proxy
from .sparsify import bss_sparsify, build_partition, greedy_removal, random_subsample

PIPELINES = ("iid", "conditioned", "subsampled", "bss", "greedy_removed")
ZERO_ERROR = 1e-14
BOUND_SLACK = 1e-10


@dataclass(frozen=True)
class Reconstruction:
    """Coefficients of the weighted least-squares fit in the orthonormal basis."""

    coeffs: np.ndarray
    sample_ref: dict
    gram_lambda_min: float


def weighted_least_squares(space, sample, values) -> Reconstruction:
    """Discrete orthogonal projection of the data onto the space.

    Solves ``G a = b`` where ``b_j = <L_j, u>_X``; the coefficients of the
    fit are ``conj(a)``.
    """
    G = gram(sample, space)
    lmin = lambda_min(G)
    if lmin <= SINGULAR_TOL:
        raise ReconstructionFailure(f"singular Gram (lambda_min = {lmin:.3e})")
    a = solve_normal_equations(G, rhs_vector(sample, space, values))
    ref = {"provenance": sample.provenance, "size": len(sample), "parent_size": sample.parent_size}
    return Reconstruction(np.conj(a), ref, lmin)


def l2_error_sq(space, u, rec: Reconstruction) -> float:
    """``||u - sum_j c_j L_j||^2``.

    Evaluated as ``(||u||^2 - |<u, L>|^2) + |<u, L> - c|^2``, which equals
    ``||u||^2 - 2 Re<u, u~> + ||u~||^2`` but keeps the in-space case free of
    cancellation.
    """
    uc = coefficients(space, u)
    err = best_approx_error_sq(space, u) + float(np.sum(np.abs(uc - rec.coeffs) ** 2))
    return max(err, 0.0)


@dataclass
class TrialParams:
    """Knobs for one pipeline run; ``m=None`` means the ``budget(epsilon)`` rule."""

    m: Optional[int] = None
    epsilon: float = 0.5
    strategy: str = "randomized"
    theta: float = 1.0
    trial_budget: int = 10**4
    move_budget: int = 10**4
    c: float = 2.0
    lambda_floor: float = 0.5
    max_redraws: int = 1000

    def sample_size(self, n):
        return self.m if self.m is not None else minimal_budget(n, self.epsilon)


@dataclass
class TrialReport:
    pipeline: str
    sample_size: int
    parent_size: int
    redraw_count: int
    error_sq: Optional[float]
    e_n_sq: float
    ratio: Optional[float]
    lambda_min: Optional[float]
    provenance: Optional[str]
    evaluations: int = 0
    failed: bool = False
    failure: Optional[str] = None
    split_failures: int = 0
    achieved_c0: Optional[float] = None
    achieved_C0: Optional[float] = None
    levels: Optional[int] = None


class _Counted:
    def __init__(self, u):
        self.u = u
        self.calls = 0

    def __call__(self, x):
        x = np.asarray(x)
        self.calls += x.size
        return self.u(x)


def _final_sample(space, pipeline, params, rng, info):
    m = params.sample_size(space.n)
    if pipeline == "iid":
        return draw_iid(space, m, rng)
    parent = conditioned_sample(space, m, rng, params.max_redraws)
    info["redraw_count"] = parent.redraw_count
    if pipeline == "conditioned":
        return parent
    if pipeline == "subsampled":
        part = build_partition(
            parent, space, params.strategy, rng, params.theta, params.trial_budget, params.move_budget
        )
        info.update(achieved_c0=part.achieved_c0, achieved_C0=part.achieved_C0, levels=part.schedule.levels)
        return random_subsample(part, parent, rng)
    if pipeline == "bss":
        return bss_sparsify(parent, space, params.c)
    if pipeline == "greedy_removed":
        return greedy_removal(parent, space, params.lambda_floor)
    raise ParameterError(f"unknown pipeline {pipeline!r}")


def run_trial(space, u, pipeline: str, params: TrialParams, rng) -> TrialReport:
    """Sample, optionally sparsify, evaluate ``u`` at the final points only, and fit.

    The target is never evaluated on rejected or discarded points; the
    report's ``evaluations`` field counts the calls actually made.
    """
    if pipeline not in PIPELINES:
        raise ParameterError(f"unknown pipeline {pipeline!r}")
    e_n_sq = best_approx_error_sq(space, u)
    info = {"redraw_count": 0}
    failed = dict(pipeline=pipeline, sample_size=0, parent_size=0, error_sq=None, e_n_sq=e_n_sq,
                  ratio=None, lambda_min=None, provenance=None, failed=True)
    try:
        X = _final_sample(space, pipeline, params, rng, info)
    except SplitSearchFailure as exc:
        return TrialReport(redraw_count=info["redraw_count"], failure=f"split_search: {exc}",
                           split_failures=1, **failed)
    except (ConditioningFailureError, SparsificationFailure) as exc:
        return TrialReport(redraw_count=info["redraw_count"], failure=type(exc).__name__, **failed)
    failed.update(sample_size=len(X), parent_size=X.parent_size, provenance=X.provenance)
    extra = {k: info[k] for k in ("achieved_c0", "achieved_C0", "levels") if k in info}
    if lambda_min(gram(X, space)) <= SINGULAR_TOL:
        return TrialReport(redraw_count=info["redraw_count"], failure="singular_gram", lambda_min=0.0,
                           **{k: v for k, v in failed.items() if k != "lambda_min"}, **extra)
    counted = _Counted(u)
    rec = weighted_least_squares(space, X, counted(X.points))
    err = l2_error_sq(space, u, rec)
    ratio = err / e_n_sq if e_n_sq > ZERO_ERROR * max(1.0, norm_sq(space, u)) else None
    return TrialReport(
        pipeline=pipeline,
        sample_size=len(X),
        parent_size=X.parent_size,
        redraw_count=info["redraw_count"],
        error_sq=err,
        e_n_sq=e_n_sq,
        ratio=ratio,
        lambda_min=rec.gram_lambda_min,
        provenance=X.provenance,
        evaluations=counted.calls,
        **extra,
    )


def _mean_se(values):
    values = np.asarray([v for v in values if v is not None], dtype=float)
    if values.size == 0:
        return None, None
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(values.mean()), se


@dataclass
class MonteCarloReport:
    pipeline: str
    trials: int
    failures: int
    failure_fraction: float
    stats: dict
    reports: List[TrialReport] = field(default_factory=list)

    def summary(self):
        return {
            "pipeline": self.pipeline,
            "trials": self.trials,
            "failures": self.failures,
            "failure_fraction": self.failure_fraction,
            **self.stats,
        }

    def rows(self):
        return [asdict(r) for r in self.reports]


SUMMARY_FIELDS = ("error_sq", "ratio", "sample_size", "redraw_count", "lambda_min",
                  "achieved_c0", "achieved_C0")


def monte_carlo(space, u, pipeline, params: TrialParams, trials: int, rng: RngStream) -> MonteCarloReport:
    """Run independent trials; trial ``t`` uses stream ``(seed, stream_id + t)``."""
    if trials < 1:
        raise ParameterError("need at least one trial")
    reports = [run_trial(space, u, pipeline, params, rng.child(t)) for t in range(trials)]
    ok = [r for r in reports if not r.failed]
    stats = {}
    for name in SUMMARY_FIELDS:
        mean, se = _mean_se(getattr(r, name) for r in ok)
        stats[f"mean_{name}"] = mean
        stats[f"se_{name}"] = se
    failures = len(reports) - len(ok)
    report = MonteCarloReport(pipeline, trials, failures, failures / trials, stats, reports)
    if not ok:
        raise HarnessError(f"all {trials} trials of the {pipeline} pipeline failed", report)
    return report


def verify_worst_case_bound(space, u, sample, rec, alpha, beta, grid_size=1000):
    """Check ``||u - u~|| <= (1 + sqrt(alpha beta)) * sup|u - P u|`` under a verified framing.

    The framing ``beta^{-1} ||v||^2 <= ||v||_X^2 <= alpha ||v||^2`` on the space
    is checked through the Gram eigenvalues first. Returns ``(passed, margin)``
    where ``margin`` is the right side minus the left side; the check allows
    an absolute round-off slack of ``1e-10 * max(1, ||u||)``.
    """
    ev = eigvalsh(gram(sample, space))
    if ev[0] < 1.0 / beta - 1e-12 or ev[-1] > alpha + 1e-12:
        raise PreconditionError(
            f"Gram spectrum [{ev[0]:.6g}, {ev[-1]:.6g}] not within [1/beta, alpha] = "
            f"[{1 / beta:.6g}, {alpha:.6g}]"
        )
    lhs = math.sqrt(l2_error_sq(space, u, rec))
    rhs = (1.0 + math.sqrt(alpha * beta)) * sup_error_proxy(space, u, grid_size)
    # round-off allowance so that exact reproduction (both sides ~0) passes
    slack = BOUND_SLACK * max(1.0, math.sqrt(norm_sq(space, u)))
    return lhs <= rhs + slack, rhs - lhs
