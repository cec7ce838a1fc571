"""Mirrored-movement task.

A preprogrammed target joint alternates between two set points along a
trapezoidal waveform; the learner joint is driven by clipped angular
displacement actions and is rewarded for staying inside a small angular
band around the target, with a proportional punishment outside it.
"""

from __future__ import annotations

from dataclasses import dataclass

THETA_MIN = 0.0349
THETA_MAX = 1.5446


@dataclass(frozen=True)
class EnvConfig:
    theta_min: float = THETA_MIN
    theta_max: float = THETA_MAX
    period: int = 800
    num_periods: int = 13
    ramp_steps: int = 25          # linear transition length at each half-period
    delta_theta_max: float = 0.05
    in_band_reward: float = 1.0
    punishment_slope: float = 1.0  # per rad of angular error outside the band

    def __post_init__(self):
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be < theta_max")
        if self.period <= 0 or self.num_periods <= 0:
            raise ValueError("period and num_periods must be positive")
        if not 0 < self.ramp_steps < self.period // 2:
            raise ValueError("ramp_steps must fit inside a half-period")

    @property
    def total_steps(self) -> int:
        return self.period * self.num_periods

    def to_dict(self) -> dict:
        return {
            "theta_min": self.theta_min,
            "theta_max": self.theta_max,
            "period": self.period,
            "num_periods": self.num_periods,
            "ramp_steps": self.ramp_steps,
            "delta_theta_max": self.delta_theta_max,
            "in_band_reward": self.in_band_reward,
            "punishment_slope": self.punishment_slope,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvConfig":
        return cls(**d)


@dataclass(frozen=True)
class EnvState:
    t: int
    theta_left: float
    theta_target: float


def target_angle(t: int, cfg: EnvConfig) -> float:
    """Preprogrammed target angle at step t.

    One period: ramp from theta_min to theta_max over ramp_steps starting at
    phase 0, hold at theta_max, ramp back down starting at phase period/2,
    hold at theta_min for the remainder.
    """
    phase = t % cfg.period
    half = cfg.period // 2
    span = cfg.theta_max - cfg.theta_min
    if phase < cfg.ramp_steps:
        return cfg.theta_min + span * phase / cfg.ramp_steps
    if phase < half:
        return cfg.theta_max
    if phase < half + cfg.ramp_steps:
        return cfg.theta_max - span * (phase - half) / cfg.ramp_steps
    return cfg.theta_min


def mdp_reward(theta_left: float, theta_target: float, cfg: EnvConfig) -> float:
    """+in_band_reward inside the angular band, proportional punishment outside."""
    diff = abs(theta_left - theta_target)
    if diff <= cfg.delta_theta_max:
        return cfg.in_band_reward
    return -cfg.punishment_slope * diff


def initial_state(cfg: EnvConfig) -> EnvState:
    return EnvState(t=0, theta_left=cfg.theta_min, theta_target=target_angle(0, cfg))


def step(state: EnvState, action: float, cfg: EnvConfig) -> tuple[EnvState, float]:
    """Apply an angular displacement, advance the target, emit the reward."""
    theta_left = min(max(state.theta_left + action, cfg.theta_min), cfg.theta_max)
    t_next = state.t + 1
    theta_target = target_angle(t_next, cfg)
    new_state = EnvState(t=t_next, theta_left=theta_left, theta_target=theta_target)
    return new_state, mdp_reward(theta_left, theta_target, cfg)
