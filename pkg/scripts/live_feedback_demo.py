#!/usr/bin/env python3
"""Drive a short live C+F session with a scripted trainer - no browser needed.

Runs the real-time loop in-process, subscribes to the frame stream, holds
the control channel at the ideal trace, and presses reward/punishment keys
based on what the frames show, mimicking a (very attentive) human trainer.
Prints pacing statistics and the end-of-session summary.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
import time

from mirrorlearn.experiment import Condition, ExperimentConfig
from mirrorlearn.live_service import LiveSession
from mirrorlearn.mirror_env import EnvConfig
from mirrorlearn.trainer_sim import ideal_emg


async def demo(seconds: float, tick_ms: int, out_dir: str) -> dict:
    steps = int(seconds * 1000 / tick_ms)
    config = ExperimentConfig(
        condition=Condition.HUMAN_CONTROL_FEEDBACK,
        seed=0,
        total_steps=steps,
        tick_ms=tick_ms,
        env=EnvConfig(period=steps, num_periods=1),
        out_dir=out_dir,
    )
    session = LiveSession("demo", config)
    sub = session.subscribe()
    session.start()

    frames = 0
    last_press_t = -10
    started = time.perf_counter()
    while True:
        msg = await sub.queue.get()
        if msg["type"] == "session_end":
            break
        if msg["type"] != "frame":
            continue
        frames += 1
        t = msg["t"]
        session.apply_event(
            {"kind": "control_value", "value": ideal_emg(t + 1, config.env)}
        )
        # press a key roughly every 10 ticks, a plausibly human feedback rate
        if t - last_press_t >= 10:
            in_band = abs(msg["theta_left"] - msg["theta_target"]) <= 0.05
            kind = "feedback_reward" if in_band else "feedback_punish"
            session.apply_event({"kind": kind, "client_time": int(time.time() * 1000)})
            last_press_t = t
    elapsed = time.perf_counter() - started

    result = await session.stop()
    print(f"frames: {frames} in {elapsed:.1f}s "
          f"(expected ~{seconds * 1000 / tick_ms:.0f}), overruns: {result['overruns']}")
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=10.0)
    parser.add_argument("--tick-ms", type=int, default=30)
    parser.add_argument("--out", default="runs/live-demo")
    args = parser.parse_args(argv)

    result = asyncio.run(demo(args.seconds, args.tick_ms, args.out))
    summary = result["summary"]
    print(f"status: {result['status']}, steps: {result['steps_completed']}, "
          f"log: {result['log_path']}")
    print(f"feedback sent: {summary['total_feedback']} "
          f"({summary['reward_count']} rewards / {summary['punish_count']} punishments)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
