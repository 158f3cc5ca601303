"""Command-line experiment runner.

Subcommands::

    wlsample weights    --basis legendre --n 4 --grid-size 101
    wlsample sample     --config cfg.json [--seed S] [--pipeline P] [--out PATH]
    wlsample schedule   --n 4 --m 600
    wlsample experiment --config cfg.json [--seed S] [--trials T] [--pipeline P] [--out PATH]

Exit codes: 0 success, 1 runtime or harness failure, 2 usage or config error.
CSV output is UTF-8 with LF line endings; floats carry 17 significant digits
and diagnostics follow as ``#``-prefixed footer lines.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .errors import HarnessError, WLSError
from .estimator import PIPELINES, _final_sample, monte_carlo
from .gramian import gram, spectral_distance_to_identity
from .sampling import RngStream
from .sparsify import build_schedule
from .spaces import BASES, FunctionSpace, christoffel_sum, uniform_grid
from .targets import builtin_target

TARGET_STREAM = 1 << 40


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(header, rows, footer=()):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def coupon_failure_probability(n, m):
    """Probability that ``m`` uniform draws miss at least one of ``n`` equal cells."""
    hit_all = sum((-1) ** k * math.comb(n, k) * (1 - k / n) ** m for k in range(n + 1))
    return 1.0 - hit_all


def make_target(cfg: ExperimentConfig, space):
    t = cfg.target
    if t.coeffs is not None:
        coeffs = [complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in t.coeffs]
        if len(coeffs) != space.n:
            raise ConfigError(f"target.coeffs needs {space.n} entries")
        return builtin_target(space, "random_vn", coeffs=np.array(coeffs))
    return builtin_target(space, t.name, k=t.k, rng=RngStream(t.seed, TARGET_STREAM),
                          complex_valued=t.complex)


# -- subcommands -----------------------------------------------------------


def cmd_weights(args):
    try:
        space = FunctionSpace(args.basis, args.n, args.quadrature_order)
        x = uniform_grid(space, args.grid_size)
    except WLSError as exc:
        raise ConfigError(str(exc)) from exc
    s = christoffel_sum(space, x)
    rows = zip(x, s, space.n / s)
    _emit(write_csv(["x", "sum_Lj_sq", "w"], rows), args.out)
    return 0


def cmd_sample(args):
    cfg = _config(args)
    space = cfg.space.build()
    pipeline = cfg.pipelines[0]
    rng = RngStream(cfg.seed, 0)
    info = {"redraw_count": 0}
    X = _final_sample(space, pipeline, cfg.params(pipeline), rng, info)
    rows = [(i, x, w, X.provenance, X.redraw_count) for i, (x, w) in enumerate(zip(X.points, X.weights))]
    footer = [f"gram_spectral_distance={fmt(spectral_distance_to_identity(gram(X, space)))}"]
    _emit(write_csv(["index", "x", "w", "provenance", "redraw_count"], rows, footer), args.out)
    return 0


def cmd_schedule(args):
    try:
        sched = build_schedule(args.n, args.m)
    except WLSError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(_dumps(sched.as_dict()), args.out)
    return 0


TRIAL_HEADER = ["pipeline", "trial", "m_final", "error_sq", "e_n_sq", "ratio", "lambda_min",
                "redraws", "split_failures", "failed", "evaluations", "achieved_c0", "achieved_C0"]


def run_experiment(cfg: ExperimentConfig):
    """Run every configured pipeline; returns ``(csv_text, summary_dict, ok)``."""
    space = cfg.space.build()
    u = make_target(cfg, space)
    rows, summaries = [], {}
    ok = True
    for p_idx, pipeline in enumerate(cfg.pipelines):
        rng = RngStream(cfg.seed, p_idx * (1 << 32))
        try:
            report = monte_carlo(space, u, pipeline, cfg.params(pipeline), cfg.trials, rng)
            error = None
        except HarnessError as exc:
            report, error = exc.report, str(exc)
            ok = False
        for t, r in enumerate(report.reports):
            rows.append((pipeline, t, r.sample_size, r.error_sq, r.e_n_sq, r.ratio, r.lambda_min,
                         r.redraw_count, r.split_failures, r.failed, r.evaluations,
                         r.achieved_c0, r.achieved_C0))
        summary = report.summary()
        summary["m"] = cfg.resolved_m(pipeline)
        if pipeline == "subsampled":
            summary["achieved_constants"] = [[r.achieved_c0, r.achieved_C0] for r in report.reports
                                             if not r.failed]
        if pipeline == "iid" and space.basis_id == "piecewise_constant":
            summary["expected_failure_fraction"] = coupon_failure_probability(space.n, summary["m"])
        if error is not None:
            summary["error"] = error
        summaries[pipeline] = summary
    summary = {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "e_n_sq": report.reports[0].e_n_sq if report.reports else None,
        "pipelines": summaries,
        "config": cfg.as_dict(),
    }
    return write_csv(TRIAL_HEADER, rows), summary, ok


def cmd_experiment(args):
    cfg = _config(args)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be positive")
        cfg.trials = args.trials
    out = args.out or cfg.output_path
    csv_text, summary, ok = run_experiment(cfg)
    if out is None:
        sys.stdout.write(csv_text)
        sys.stderr.write(_dumps(summary))
    else:
        _emit(csv_text, out)
        _emit(_dumps(summary), Path(out).with_suffix(".json"))
    if not ok:
        sys.stdout.write(_dumps({"error": "HarnessError", "pipelines": {
            k: v["error"] for k, v in summary["pipelines"].items() if "error" in v}}))
        return 1
    return 0


def _config(args):
    if args.config is None:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.pipeline is not None:
        if args.pipeline not in PIPELINES:
            raise ConfigError(f"unknown pipeline {args.pipeline!r}")
        cfg.pipelines = [args.pipeline]
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(prog="wlsample", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="Christoffel weights on a uniform grid (CSV)")
    p.add_argument("--basis", choices=BASES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid-size", type=int, default=101)
    p.add_argument("--quadrature-order", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_weights)

    for name, func, helptext in (
        ("sample", cmd_sample, "draw one sample from the first configured pipeline (CSV)"),
        ("experiment", cmd_experiment, "Monte Carlo error experiment (CSV + JSON summary)"),
    ):
        p = sub.add_parser(name, help=helptext,
                           description="Config defaults: space legendre n=4, target exp, "
                                       "pipelines [conditioned], m budget(0.5), strategy "
                                       "randomized, c=2, lambda_floor=0.5, theta=1, trials=100, "
                                       "seed=0, max_redraws=1000.")
        p.add_argument("--config", default=None, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--pipeline", default=None, help=f"override pipelines; one of {PIPELINES}")
        p.add_argument("--out", default=None, help="output CSV path (summary goes next to it as .json)")
        if name == "experiment":
            p.add_argument("--trials", type=int, default=None, help="override number of trials")
        p.set_defaults(func=func)

    p = sub.add_parser("schedule", help="split schedule for n vectors among m (JSON)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_schedule)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.exit(2, f"wlsample: error: {exc}\n")
    except WLSError as exc:
        sys.stdout.write(_dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    except ValueError as exc:
        parser.exit(2, f"wlsample: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
