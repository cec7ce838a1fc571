"""Batch experiment runner, per-run logging, and outcome metrics.

Wires the tile coder, learner, environment, and trainer models into the
five experimental conditions.  Each run is fully determined by its config:
one seed expands into named substreams (policy, emg, feedback) so that
toggling the feedback channel does not perturb the policy's draw sequence.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol

import numpy as np

from . import actor_critic, mirror_env, tile_coder, trainer_sim
from .actor_critic import DivergenceError, LearnerParams, LearnerState
from .mirror_env import EnvConfig
from .tile_coder import TileCoderConfig
from .trainer_sim import EmgModel, FeedbackEvent, FeedbackModel, ShapingState

MAE_WINDOW = 5000
TIMING_BINS = 16


class Condition(str, enum.Enum):
    HUMAN_CONTROL = "C"
    HUMAN_CONTROL_FEEDBACK = "C+F"
    HUMAN_FEEDBACK = "F"
    SIM_CONTROL_FEEDBACK = "sim(C+F)"
    SIM_CONTROL = "sim(C)"

    @property
    def is_simulated(self) -> bool:
        return self in (Condition.SIM_CONTROL_FEEDBACK, Condition.SIM_CONTROL)

    @property
    def has_feedback(self) -> bool:
        return self in (
            Condition.HUMAN_CONTROL_FEEDBACK,
            Condition.HUMAN_FEEDBACK,
            Condition.SIM_CONTROL_FEEDBACK,
        )

    @property
    def control_is_simulated(self) -> bool:
        # condition F pairs live human feedback with the simulated control signal
        return self in (
            Condition.HUMAN_FEEDBACK,
            Condition.SIM_CONTROL_FEEDBACK,
            Condition.SIM_CONTROL,
        )

    @property
    def slug(self) -> str:
        return _SLUGS[self]


_SLUGS = {
    Condition.HUMAN_CONTROL: "c",
    Condition.HUMAN_CONTROL_FEEDBACK: "cf",
    Condition.HUMAN_FEEDBACK: "f",
    Condition.SIM_CONTROL_FEEDBACK: "sim-cf",
    Condition.SIM_CONTROL: "sim-c",
}
_SLUG_TO_CONDITION = {slug: cond for cond, slug in _SLUGS.items()}


def condition_from_string(s: str) -> Condition:
    """Accept either the display form ("sim(C)") or the slug ("sim-c")."""
    try:
        return Condition(s)
    except ValueError:
        pass
    try:
        return _SLUG_TO_CONDITION[s.lower()]
    except KeyError:
        raise ValueError(f"unknown condition {s!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    condition: Condition = Condition.SIM_CONTROL
    seed: int = 0
    total_steps: int = 10400
    tick_ms: int = 30                 # live sessions only; batch runs unthrottled
    tile: TileCoderConfig = field(default_factory=TileCoderConfig)
    learner: LearnerParams = field(default_factory=LearnerParams)
    env: EnvConfig = field(default_factory=EnvConfig)
    emg: EmgModel = field(default_factory=EmgModel)
    feedback: FeedbackModel = field(default_factory=FeedbackModel)
    out_dir: str = "runs"

    def __post_init__(self):
        if self.total_steps != self.env.period * self.env.num_periods:
            raise ValueError(
                f"total_steps ({self.total_steps}) must equal period x num_periods "
                f"({self.env.period} x {self.env.num_periods})"
            )
        if self.tick_ms <= 0:
            raise ValueError("tick_ms must be positive")

    @property
    def run_stem(self) -> str:
        return f"{self.condition.slug}_seed{self.seed:05d}"

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(
            condition=self.condition, seed=seed, total_steps=self.total_steps,
            tick_ms=self.tick_ms, tile=self.tile, learner=self.learner,
            env=self.env, emg=self.emg, feedback=self.feedback, out_dir=self.out_dir,
        )

    def with_condition(self, condition: Condition) -> "ExperimentConfig":
        return ExperimentConfig(
            condition=condition, seed=self.seed, total_steps=self.total_steps,
            tick_ms=self.tick_ms, tile=self.tile, learner=self.learner,
            env=self.env, emg=self.emg, feedback=self.feedback, out_dir=self.out_dir,
        )

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "seed": self.seed,
            "total_steps": self.total_steps,
            "tick_ms": self.tick_ms,
            "tile": self.tile.to_dict(),
            "learner": self.learner.to_dict(),
            "env": self.env.to_dict(),
            "emg": self.emg.to_dict(),
            "feedback": self.feedback.to_dict(),
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        """Build a config from a (possibly partial) JSON document.

        Missing sections fall back to the defaults, so a config file only
        needs to state what it overrides.
        """
        kwargs = {}
        if "condition" in d:
            kwargs["condition"] = condition_from_string(d["condition"])
        for key in ("seed", "total_steps", "tick_ms", "out_dir"):
            if key in d:
                kwargs[key] = d[key]
        for key, sub in (
            ("tile", TileCoderConfig),
            ("learner", LearnerParams),
            ("env", EnvConfig),
            ("emg", EmgModel),
            ("feedback", FeedbackModel),
        ):
            if key in d:
                kwargs[key] = sub.from_dict(d[key])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")


@dataclass(slots=True)
class StepRecord:
    """One logged timestep; field order matches the JSONL schema."""

    t: int
    theta_target: float
    theta_left: float
    emg: float
    ideal_emg: float
    mu: float
    sigma: float
    action: float
    r_mdp: float
    h: float
    r_total: float
    td_error: float
    feedback_event: Optional[FeedbackEvent]

    def to_json_obj(self) -> dict:
        return {
            "t": self.t,
            "theta_target": self.theta_target,
            "theta_left": self.theta_left,
            "emg": self.emg,
            "ideal_emg": self.ideal_emg,
            "mu": self.mu,
            "sigma": self.sigma,
            "action": self.action,
            "r_mdp": self.r_mdp,
            "h": self.h,
            "r_total": self.r_total,
            "td_error": self.td_error,
            "feedback_event": (
                self.feedback_event.to_dict() if self.feedback_event else None
            ),
        }

    @classmethod
    def from_json_obj(cls, d: dict) -> "StepRecord":
        ev = d.get("feedback_event")
        return cls(
            t=d["t"], theta_target=d["theta_target"], theta_left=d["theta_left"],
            emg=d["emg"], ideal_emg=d["ideal_emg"], mu=d["mu"], sigma=d["sigma"],
            action=d["action"], r_mdp=d["r_mdp"], h=d["h"], r_total=d["r_total"],
            td_error=d["td_error"],
            feedback_event=FeedbackEvent.from_dict(ev) if ev else None,
        )


@dataclass
class RunSummary:
    """Outcome metrics for one run; mae_last_5k is None for truncated runs."""

    mae_last_5k: Optional[float]
    emg_error_mean: float
    total_feedback: int
    reward_count: int
    punish_count: int
    reward_timing_hist: list[int]
    converged: bool

    def to_dict(self) -> dict:
        return {
            "mae_last_5k": self.mae_last_5k,
            "emg_error_mean": self.emg_error_mean,
            "total_feedback": self.total_feedback,
            "reward_count": self.reward_count,
            "punish_count": self.punish_count,
            "reward_timing_hist": self.reward_timing_hist,
            "converged": self.converged,
        }


class RunDiverged(RuntimeError):
    """A run hit non-finite learner state; partial log and snapshot attached."""

    def __init__(self, message: str, records: list[StepRecord], snapshot_doc: dict):
        super().__init__(message)
        self.records = records
        self.snapshot = snapshot_doc


# --- control / feedback sources ---------------------------------------------


class ControlSource(Protocol):
    def value(self, t: int) -> float: ...


class FeedbackSource(Protocol):
    def poll(self, t: int, in_band: bool) -> Optional[FeedbackEvent]: ...


class SimulatedControl:
    """Control channel backed by the simulated EMG model; one draw per step."""

    def __init__(self, model: EmgModel, env_cfg: EnvConfig, rng: np.random.Generator):
        self._model = model
        self._env_cfg = env_cfg
        self._rng = rng

    def value(self, t: int) -> float:
        return trainer_sim.simulated_emg(t, self._rng, self._model, self._env_cfg)


class SimulatedFeedback:
    """Feedback channel backed by the stochastic trainer model."""

    def __init__(self, model: FeedbackModel, rng: np.random.Generator):
        self._model = model
        self._rng = rng

    def poll(self, t: int, in_band: bool) -> Optional[FeedbackEvent]:
        return trainer_sim.simulated_feedback(in_band, self._rng, self._model, t)


class NoFeedback:
    def poll(self, t: int, in_band: bool) -> Optional[FeedbackEvent]:
        return None


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Named independent substreams derived from one run seed."""
    policy, emg, feedback = np.random.SeedSequence(seed).spawn(3)
    return {
        "policy": np.random.Generator(np.random.PCG64(policy)),
        "emg": np.random.Generator(np.random.PCG64(emg)),
        "feedback": np.random.Generator(np.random.PCG64(feedback)),
    }


def default_sources(
    config: ExperimentConfig, rngs: dict[str, np.random.Generator]
) -> tuple[ControlSource, FeedbackSource]:
    """Simulated providers for the sim_* conditions."""
    if not config.condition.is_simulated:
        raise ValueError(
            f"condition {config.condition.value} needs live sources; "
            "only sim conditions run headless"
        )
    control = SimulatedControl(config.emg, config.env, rngs["emg"])
    if config.condition.has_feedback:
        feedback: FeedbackSource = SimulatedFeedback(config.feedback, rngs["feedback"])
    else:
        feedback = NoFeedback()
    return control, feedback


# --- step engine -------------------------------------------------------------


class InteractionLoop:
    """Single-step engine shared by batch runs and the live service.

    Owns the learner, environment, and shaping state; each step() performs
    observe -> act -> environment step -> feedback -> reward combination ->
    learner update and returns the logged record.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        control_source: ControlSource,
        feedback_source: FeedbackSource,
        rng_policy: np.random.Generator,
    ):
        self.config = config
        self.control = control_source
        self.feedback = feedback_source
        self.rng_policy = rng_policy
        self.learner = LearnerState.zeros(config.tile.table_size)
        self.env_state = mirror_env.initial_state(config.env)
        self.shaping = ShapingState()
        self._emg = _clamp01(control_source.value(0))
        self._fv = tile_coder.encode(self._emg, self.env_state.theta_left, config.tile)

    @property
    def t(self) -> int:
        return self.env_state.t

    def step(self) -> StepRecord:
        cfg = self.config
        t = self.env_state.t
        sample = actor_critic.select_action(
            self.learner, self._fv, cfg.learner, self.rng_policy
        )
        env_next, r_mdp = mirror_env.step(self.env_state, sample.action, cfg.env)
        in_band = (
            abs(env_next.theta_left - env_next.theta_target) <= cfg.env.delta_theta_max
        )
        event = self.feedback.poll(t, in_band)
        self.shaping, h = trainer_sim.shaping_step(self.shaping, event, cfg.feedback)
        r_total = trainer_sim.combine(r_mdp, h)
        emg_next = _clamp01(self.control.value(t + 1))
        fv_next = tile_coder.encode(emg_next, env_next.theta_left, cfg.tile)
        td_error = actor_critic.update(
            self.learner, self._fv, sample, r_total, fv_next, cfg.learner
        )
        record = StepRecord(
            t=t,
            theta_target=env_next.theta_target,
            theta_left=env_next.theta_left,
            emg=self._emg,
            ideal_emg=trainer_sim.ideal_emg(t, cfg.env),
            mu=sample.mu,
            sigma=sample.sigma,
            action=sample.action,
            r_mdp=r_mdp,
            h=h,
            r_total=r_total,
            td_error=td_error,
            feedback_event=event,
        )
        self._emg = emg_next
        self._fv = fv_next
        self.env_state = env_next
        return record


def _clamp01(v: float) -> float:
    return min(max(float(v), 0.0), 1.0)


def run(
    config: ExperimentConfig,
    control_source: Optional[ControlSource] = None,
    feedback_source: Optional[FeedbackSource] = None,
    step_hook: Optional[Callable[[InteractionLoop, StepRecord], None]] = None,
) -> tuple[list[StepRecord], RunSummary]:
    """Execute one full run and summarize it.

    Sources default to the simulated providers for sim_* conditions; human
    conditions must supply their own (the live service does).  Divergence
    raises RunDiverged with the partial log preserved.
    """
    rngs = rng_streams(config.seed)
    if control_source is None or feedback_source is None:
        default_control, default_fb = default_sources(config, rngs)
        control_source = control_source or default_control
        feedback_source = feedback_source or default_fb
    loop = InteractionLoop(config, control_source, feedback_source, rngs["policy"])
    records: list[StepRecord] = []
    try:
        for _ in range(config.total_steps):
            record = loop.step()
            records.append(record)
            if step_hook is not None:
                step_hook(loop, record)
    except DivergenceError as exc:
        raise RunDiverged(
            f"run {config.run_stem} diverged at step {loop.t}: {exc}",
            records,
            exc.snapshot,
        ) from exc
    return records, summarize_run(records, config)


# --- metrics -----------------------------------------------------------------


def mae_last_k(records: list[StepRecord], k: int = MAE_WINDOW) -> float:
    """Mean absolute angular error over the final k records."""
    if len(records) < k:
        raise ValueError(f"need at least {k} records, got {len(records)}")
    window = records[-k:]
    return sum(abs(r.theta_left - r.theta_target) for r in window) / k


def emg_error(records: list[StepRecord]) -> tuple[np.ndarray, float]:
    """Per-step |emg - ideal| series and its mean over the run."""
    series = np.array([abs(r.emg - r.ideal_emg) for r in records])
    return series, float(series.mean()) if len(series) else 0.0


def reward_timing(
    records: list[StepRecord], period: int = 800, bins: int = TIMING_BINS
) -> list[int]:
    """Histogram of feedback events over phase within the waveform period."""
    hist = [0] * bins
    for r in records:
        if r.feedback_event is not None:
            # Equal-width phase bins; works for periods not divisible by bins.
            hist[(r.t % period) * bins // period] += 1
    return hist


def summarize_run(records: list[StepRecord], config: ExperimentConfig) -> RunSummary:
    events = [r.feedback_event for r in records if r.feedback_event is not None]
    reward_count = sum(1 for e in events if e.value > 0)
    punish_count = len(events) - reward_count
    mae = mae_last_k(records) if len(records) >= MAE_WINDOW else None
    _, emg_mean = emg_error(records)
    return RunSummary(
        mae_last_5k=mae,
        emg_error_mean=emg_mean,
        total_feedback=len(events),
        reward_count=reward_count,
        punish_count=punish_count,
        reward_timing_hist=reward_timing(records, period=config.env.period),
        converged=(mae is not None and mae <= 2 * config.env.delta_theta_max),
    )


AGGREGATE_METRICS = (
    "mae_last_5k",
    "emg_error_mean",
    "total_feedback",
    "reward_count",
    "punish_count",
)


def summarize_condition(summaries: list[RunSummary]) -> dict[str, dict[str, float]]:
    """Median and quartiles per metric over a set of runs."""
    if not summaries:
        raise ValueError("need at least one run to summarize")
    table = {}
    for metric in AGGREGATE_METRICS:
        values = [getattr(s, metric) for s in summaries]
        values = [v for v in values if v is not None]
        if not values:
            continue
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        table[metric] = {"median": float(median), "q1": float(q1), "q3": float(q3)}
    return table


# --- log and summary files ---------------------------------------------------

SUMMARY_FIELDS = (
    "condition", "seed", "mae_last_5k", "emg_error_mean", "total_feedback",
    "reward_count", "punish_count", "converged",
)


def records_to_jsonl(records: list[StepRecord]) -> bytes:
    out = io.StringIO()
    for r in records:
        json.dump(r.to_json_obj(), out, separators=(",", ":"))
        out.write("\n")
    return out.getvalue().encode()


def write_run(
    records: list[StepRecord], config: ExperimentConfig, out_dir
) -> Path:
    """Write <stem>.jsonl plus the <stem>.config.json sidecar; returns log path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / f"{config.run_stem}.jsonl"
    log_path.write_bytes(records_to_jsonl(records))
    config.save(out / f"{config.run_stem}.config.json")
    return log_path


def read_jsonl(path) -> list[StepRecord]:
    records = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(StepRecord.from_json_obj(json.loads(line)))
    return records


def sidecar_config(log_path) -> Optional[ExperimentConfig]:
    sidecar = Path(log_path).with_suffix("").with_suffix(".config.json")
    if sidecar.exists():
        return ExperimentConfig.load(sidecar)
    return None


def summary_row(config: ExperimentConfig, summary: RunSummary) -> dict:
    return {
        "condition": config.condition.value,
        "seed": config.seed,
        "mae_last_5k": "" if summary.mae_last_5k is None else repr(summary.mae_last_5k),
        "emg_error_mean": repr(summary.emg_error_mean),
        "total_feedback": summary.total_feedback,
        "reward_count": summary.reward_count,
        "punish_count": summary.punish_count,
        "converged": "true" if summary.converged else "false",
    }


def write_summary_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
