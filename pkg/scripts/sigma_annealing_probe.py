#!/usr/bin/env python3
"""Track policy spread and tracking error per period over an extended budget.

The default step budget ends with the exploration spread still well above
the action clip; this probe extends the budget and prints per-period
aggregates to show where (and whether) the spread and the tracking error
settle.  Useful when judging if a run is budget-limited or at equilibrium.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from mirrorlearn.experiment import ExperimentConfig, condition_from_string, run
from mirrorlearn.mirror_env import EnvConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--periods", type=int, default=52,
                        help="waveform periods to run (default 4x the usual budget)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--condition", default="sim-c")
    parser.add_argument("--every", type=int, default=4,
                        help="print every Nth period")
    args = parser.parse_args(argv)

    config = ExperimentConfig(
        condition=condition_from_string(args.condition),
        seed=args.seed,
        total_steps=args.periods * 800,
        env=EnvConfig(num_periods=args.periods),
    )
    records, summary = run(config)

    period = config.env.period
    print(f"{config.condition.value} seed={args.seed}, {args.periods} periods")
    print(f"{'period':>6} {'sigma_mean':>10} {'|err|_mean':>10} {'in_band':>8}")
    for p in range(0, args.periods, args.every):
        chunk = records[p * period:(p + 1) * period]
        sigma = np.mean([r.sigma for r in chunk])
        err = np.mean([abs(r.theta_left - r.theta_target) for r in chunk])
        in_band = np.mean([r.r_mdp > 0 for r in chunk])
        print(f"{p:>6} {sigma:>10.3f} {err:>10.3f} {in_band:>8.1%}")

    mae = summary.mae_last_5k
    print(f"\nmae_last_5k={mae:.4f}" if mae is not None else "\nrun too short for mae")
    return 0


if __name__ == "__main__":
    sys.exit(main())
