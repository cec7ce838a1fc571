#!/usr/bin/env python3
"""Run both simulated conditions over a seed batch and tabulate the outcome.

Writes one JSONL log + config sidecar per run plus a combined summary CSV,
then prints median/IQR tables per condition - the headline comparison
between learning from the environment reward alone and learning with the
simulated trainer added.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from mirrorlearn.experiment import (
    Condition,
    ExperimentConfig,
    run,
    summarize_condition,
    summary_row,
    write_run,
    write_summary_csv,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=30,
                        help="runs per condition (sequential from --base-seed)")
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path("runs/sim"))
    parser.add_argument("--csv", type=Path, default=None,
                        help="summary CSV (default <out>/summary.csv)")
    args = parser.parse_args(argv)
    csv_path = args.csv or args.out / "summary.csv"

    rows = []
    for condition in (Condition.SIM_CONTROL, Condition.SIM_CONTROL_FEEDBACK):
        base = ExperimentConfig(condition=condition, seed=args.base_seed)
        summaries = []
        started = time.perf_counter()
        for i in range(args.seeds):
            cfg = base.with_seed(args.base_seed + i)
            records, summary = run(cfg)
            write_run(records, cfg, args.out)
            rows.append(summary_row(cfg, summary))
            summaries.append(summary)
        elapsed = time.perf_counter() - started

        print(f"\n{condition.value}  (n={args.seeds}, {elapsed:.1f}s)")
        for metric, stats in summarize_condition(summaries).items():
            print(f"  {metric:>16}: median={stats['median']:.4f}  "
                  f"iqr=[{stats['q1']:.4f}, {stats['q3']:.4f}]")
        converged = sum(s.converged for s in summaries)
        print(f"  {'converged':>16}: {converged}/{args.seeds}")

    write_summary_csv(rows, csv_path)
    print(f"\nwrote {len(rows)} runs under {args.out}, summary at {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
