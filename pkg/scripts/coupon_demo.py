"""Piecewise constants with m = n i.i.d. points versus a subsample of a conditioned draw.

    python3 scripts/coupon_demo.py [--n 8] [--trials 500] [--seed 7]

With one point per cell required, plain i.i.d. sampling at m = n almost
always leaves a cell empty and the Gram matrix singular; the failure
fraction is compared with the exact probability 1 - n!/n^n.
"""

import argparse

from wlsample.cli import coupon_failure_probability
from wlsample.errors import HarnessError
from wlsample.estimator import TrialParams, monte_carlo
from wlsample.sampling import RngStream
from wlsample.spaces import FunctionSpace
from wlsample.targets import builtin_target


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    space = FunctionSpace("piecewise_constant", args.n)
    u = builtin_target(space, "random_vn", rng=args.seed)
    try:
        iid = monte_carlo(space, u, "iid", TrialParams(m=args.n), args.trials, RngStream(args.seed, 0))
    except HarnessError as exc:
        iid = exc.report
    sub = monte_carlo(space, u, "subsampled", TrialParams(), args.trials, RngStream(args.seed, 1 << 32))
    p = coupon_failure_probability(args.n, args.n)
    print(f"iid, m={args.n}: failure fraction {iid.failure_fraction:.4f} (exact {p:.4f})")
    print(f"subsampled: failures {sub.failures}, mean |X| {sub.stats['mean_sample_size']:.1f}, "
          f"max error_sq {max(r.error_sq for r in sub.reports if not r.failed):.2e}")


if __name__ == "__main__":
    main()
