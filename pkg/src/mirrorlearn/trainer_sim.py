"""Models of everything the human supplies.

Covers the ideal and simulated control signal, the stochastic simulated
trainer, the reward/punishment value scheme, the forward smear of discrete
feedback, and the algebraic combination with the environment reward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mirror_env import EnvConfig, target_angle

SOURCE_HUMAN = "human"
SOURCE_SIMULATED = "simulated"


@dataclass(frozen=True)
class EmgModel:
    """Simulated control signal: ideal trace plus Gaussian noise.

    ``lag_steps`` can delay the trace to mimic human reaction time; the
    default keeps the simulated channel aligned with the target, since the
    reaction delay is a property of human operators, not of the generator.
    A lagged control signal misplaces the implied target during ramps and
    puts an angle-error floor above the convergence band, so lag is opt-in.
    """

    noise_std: float = 0.05
    lag_steps: int = 0

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.lag_steps < 0:
            raise ValueError("lag_steps must be >= 0")

    def to_dict(self) -> dict:
        return {"noise_std": self.noise_std, "lag_steps": self.lag_steps}

    @classmethod
    def from_dict(cls, d: dict) -> "EmgModel":
        return cls(**d)


@dataclass(frozen=True)
class FeedbackModel:
    p_feedback: float = 0.1
    p_correct: float = 0.8
    reward_value: float = 1.0
    punish_value: float = -0.5
    smear_decay: float = 0.99
    smear_cutoff: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.p_feedback <= 1.0 or not 0.0 <= self.p_correct <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if not self.reward_value > 0 > self.punish_value:
            raise ValueError("reward_value must be positive, punish_value negative")
        if not 0.0 <= self.smear_decay < 1.0:
            raise ValueError("smear_decay must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "p_feedback": self.p_feedback,
            "p_correct": self.p_correct,
            "reward_value": self.reward_value,
            "punish_value": self.punish_value,
            "smear_decay": self.smear_decay,
            "smear_cutoff": self.smear_cutoff,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackModel":
        return cls(**d)


@dataclass(frozen=True)
class FeedbackEvent:
    t: int
    value: float           # one of {reward_value, punish_value}
    source: str            # "human" or "simulated"

    def to_dict(self) -> dict:
        return {"t": self.t, "value": self.value, "source": self.source}

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackEvent":
        return cls(t=d["t"], value=d["value"], source=d["source"])


@dataclass(frozen=True)
class ShapingState:
    """Carried feedback contribution, decayed forward in time."""

    carried: float = 0.0


def ideal_emg(t: int, env_cfg: EnvConfig) -> float:
    """Target trace rescaled to [0, 1]: 1 at full flexion, 0 at extension."""
    theta = target_angle(t, env_cfg)
    return (theta - env_cfg.theta_min) / (env_cfg.theta_max - env_cfg.theta_min)


def simulated_emg(
    t: int, rng: np.random.Generator, model: EmgModel, env_cfg: EnvConfig
) -> float:
    """Noisy, reaction-lagged version of the ideal control signal.

    Draws one noise sample per call, so call exactly once per step to keep
    a seeded stream aligned.
    """
    base = ideal_emg(max(t - model.lag_steps, 0), env_cfg)
    value = base + rng.normal(0.0, model.noise_std) if model.noise_std > 0 else base
    return min(max(value, 0.0), 1.0)


def simulated_feedback(
    in_band: bool, rng: np.random.Generator, model: FeedbackModel, t: int = 0
) -> Optional[FeedbackEvent]:
    """Stochastic trainer: emits feedback with p_feedback, correct with p_correct.

    The correct value is the reward when the learner is inside the angular
    band and the punishment otherwise; an incorrect emission is flipped.
    """
    if rng.random() >= model.p_feedback:
        return None
    correct = rng.random() < model.p_correct
    if in_band == correct:
        value = model.reward_value
    else:
        value = model.punish_value
    return FeedbackEvent(t=t, value=value, source=SOURCE_SIMULATED)


def shaping_step(
    state: ShapingState, event: Optional[FeedbackEvent], model: FeedbackModel
) -> tuple[ShapingState, float]:
    """Advance the smear by one step and return this step's feedback reward.

    A new event replaces the carried value (key repeat must not stack);
    the carried value then decays geometrically and is zeroed once it falls
    below the cutoff, so the injected reward vanishes in finite time.
    """
    carried = event.value if event is not None else state.carried
    h_t = carried
    carried *= model.smear_decay
    if abs(carried) < model.smear_cutoff:
        carried = 0.0
    return ShapingState(carried=carried), h_t


def combine(r_mdp: float, h_t: float) -> float:
    """Algebraic sum of environment and human-delivered reward."""
    return r_mdp + h_t
