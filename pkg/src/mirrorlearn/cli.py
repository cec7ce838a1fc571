"""Command-line entry points: run, summarize, validate, serve."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import actor_critic, experiment, mirror_env, trainer_sim
from .experiment import Condition, ExperimentConfig


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.load(path)


def cmd_run(args) -> int:
    config = _load_config(args.config)
    condition = experiment.condition_from_string(args.condition)
    if not condition.is_simulated:
        print(
            f"condition {condition.value} requires a live session; "
            "use `serve` and drive it over the websocket",
            file=sys.stderr,
        )
        return 2
    config = config.with_condition(condition)
    out_dir = Path(args.out or config.out_dir)
    rows = []
    for i in range(args.seeds):
        cfg = config.with_seed(config.seed + i)
        try:
            records, summary = experiment.run(cfg)
        except experiment.RunDiverged as exc:
            experiment.write_run(exc.records, cfg, out_dir)
            print(f"{cfg.run_stem}: DIVERGED after {len(exc.records)} steps")
            return 1
        experiment.write_run(records, cfg, out_dir)
        rows.append(experiment.summary_row(cfg, summary))
        mae = "n/a" if summary.mae_last_5k is None else f"{summary.mae_last_5k:.4f}"
        print(
            f"{cfg.run_stem}: mae_last_5k={mae} "
            f"feedback={summary.total_feedback} converged={summary.converged}"
        )
    if args.csv:
        experiment.write_summary_csv(rows, args.csv)
        print(f"wrote {args.csv}")
    return 0


def cmd_summarize(args) -> int:
    in_dir = Path(args.in_dir)
    log_paths = sorted(in_dir.glob("*.jsonl"))
    if not log_paths:
        print(f"no .jsonl logs under {in_dir}", file=sys.stderr)
        return 2
    rows = []
    by_condition: dict[str, list[experiment.RunSummary]] = {}
    for log_path in log_paths:
        cfg = experiment.sidecar_config(log_path)
        if cfg is None:
            print(f"skipping {log_path.name}: no config sidecar", file=sys.stderr)
            continue
        records = experiment.read_jsonl(log_path)
        summary = experiment.summarize_run(records, cfg)
        rows.append(experiment.summary_row(cfg, summary))
        by_condition.setdefault(cfg.condition.value, []).append(summary)
    if not rows:
        print("no summarizable logs found", file=sys.stderr)
        return 2
    experiment.write_summary_csv(rows, args.csv)
    print(f"wrote {args.csv} ({len(rows)} runs)")
    for condition, summaries in sorted(by_condition.items()):
        table = experiment.summarize_condition(summaries)
        print(f"\n{condition} (n={len(summaries)})")
        for metric, stats in table.items():
            print(
                f"  {metric}: median={stats['median']:.4f} "
                f"iqr=[{stats['q1']:.4f}, {stats['q3']:.4f}]"
            )
    return 0


def cmd_validate(args) -> int:
    failures = 0

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"[{status}] {name}{suffix}")
        if not ok:
            failures += 1

    worst = actor_critic.gradient_sweep(num_samples=100, seed=args.seed)
    check("policy-gradient finite differences", worst < 1e-4, f"max rel err {worst:.2e}")

    env_cfg = mirror_env.EnvConfig()
    targets = [mirror_env.target_angle(t, env_cfg) for t in range(2 * env_cfg.period)]
    in_range = all(env_cfg.theta_min <= v <= env_cfg.theta_max for v in targets)
    periodic = all(
        mirror_env.target_angle(t, env_cfg)
        == mirror_env.target_angle(t + env_cfg.period, env_cfg)
        for t in range(env_cfg.period)
    )
    check("target waveform bounded and periodic", in_range and periodic)

    fb = trainer_sim.FeedbackModel()
    state, h = trainer_sim.shaping_step(
        trainer_sim.ShapingState(), trainer_sim.FeedbackEvent(0, fb.reward_value, "simulated"), fb
    )
    steps = 0
    while h != 0.0 and steps < 1000:
        state, h = trainer_sim.shaping_step(state, None, fb)
        steps += 1
    check("feedback smear decays to zero", 0 < steps < 1000, f"{steps} steps")

    violations = []

    def hook(loop, record) -> None:
        ev = loop.learner.e_v
        if float(ev.min()) < 0.0 or float(ev.max()) > 1.0:
            violations.append(f"e_v out of [0,1] at t={record.t}")
        if record.sigma < loop.config.learner.sigma_floor:
            violations.append(f"sigma below floor at t={record.t}")
        if record.r_total != record.r_mdp + record.h:
            violations.append(f"reward identity broken at t={record.t}")

    cfg = ExperimentConfig(
        condition=Condition.SIM_CONTROL_FEEDBACK,
        seed=args.seed,
        total_steps=2 * 800,
        env=mirror_env.EnvConfig(num_periods=2),
    )
    experiment.run(cfg, step_hook=hook)
    check(
        "trace bounds, sigma floor, reward identity (2-period run)",
        not violations,
        violations[0] if violations else "",
    )

    print(f"\n{4 - failures}/4 checks passed")
    return 1 if failures else 0


def cmd_serve(args) -> int:
    import uvicorn

    from .live_service import create_app

    config = _load_config(args.config)
    host = args.host or os.environ.get("MIRRORLEARN_HOST", "127.0.0.1")
    port = args.port or int(os.environ.get("MIRRORLEARN_PORT", "8000"))
    app = create_app(default_config=config, auth_token=os.environ.get("MIRRORLEARN_TOKEN"))
    uvicorn.run(app, host=host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorlearn",
        description="Simulated and live mirror-training experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run simulated seeds and write JSONL logs")
    p_run.add_argument("--condition", required=True,
                       help="sim-c or sim-cf (human conditions need `serve`)")
    p_run.add_argument("--seeds", type=int, default=1,
                       help="number of sequential seeds starting at the config seed")
    p_run.add_argument("--config", default=None, help="JSON config file")
    p_run.add_argument("--out", default=None, help="output directory for logs")
    p_run.add_argument("--csv", default=None, help="optional per-run summary CSV")
    p_run.set_defaults(func=cmd_run)

    p_sum = sub.add_parser("summarize", help="recompute summaries from JSONL logs")
    p_sum.add_argument("--in", dest="in_dir", required=True, help="directory of logs")
    p_sum.add_argument("--csv", required=True, help="summary CSV to write")
    p_sum.set_defaults(func=cmd_summarize)

    p_val = sub.add_parser("validate", help="gradient and invariant checks")
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=cmd_validate)

    p_srv = sub.add_parser("serve", help="start the live session service")
    p_srv.add_argument("--config", default=None, help="JSON config file with defaults")
    p_srv.add_argument("--port", type=int, default=None,
                       help="bind port (falls back to MIRRORLEARN_PORT, then 8000)")
    p_srv.add_argument("--host", default=None,
                       help="bind address (falls back to MIRRORLEARN_HOST, then 127.0.0.1)")
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
