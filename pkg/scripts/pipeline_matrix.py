"""Compare the four reduced-budget pipelines on one target.

    python3 scripts/pipeline_matrix.py [--config configs/pipeline_matrix.json] [--trials 50]

Prints a table of mean sample size, mean error ratio (with standard error)
and failure counts per pipeline.
"""

import argparse
from pathlib import Path

from wlsample.cli import run_experiment
from wlsample.config import load_config

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "pipeline_matrix.json"


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--config", default=str(DEFAULT))
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    cfg = load_config(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed = args.seed
    _, summary, _ = run_experiment(cfg)
    print(f"{cfg.space.basis} n={cfg.space.n}, target={cfg.target.name}, trials={cfg.trials}, "
          f"e_n^2={summary['e_n_sq']:.3e}")
    print(f"{'pipeline':<16}{'m':>6}{'mean |X|':>10}{'ratio':>10}{'se':>9}{'fail':>6}")
    for name, s in summary["pipelines"].items():
        ratio = s["mean_ratio"]
        print(f"{name:<16}{s['m']:>6}{s['mean_sample_size'] or 0:>10.2f}"
              f"{ratio if ratio is not None else float('nan'):>10.4f}"
              f"{s['se_ratio'] or 0:>9.4f}{s['failures']:>6}")


if __name__ == "__main__":
    main()
