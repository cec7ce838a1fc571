"""Continuous-action actor-critic over binary tile features.

The policy is a Gaussian whose mean and log standard deviation are linear
in the feature vector.  A TD(lambda) critic with a clamped replacing-style
trace drives both its own update and the two actor traces.  All weight
vectors start at zero, so the initial policy is N(0, 1) before clipping.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tile_coder import FeatureVector, dot


class DivergenceError(RuntimeError):
    """Raised when the learner produces a non-finite quantity.

    Carries a full learner snapshot so a diverged run can be dumped for
    inspection instead of silently poisoning later updates.
    """

    def __init__(self, message: str, snapshot_doc: dict):
        super().__init__(message)
        self.snapshot = snapshot_doc


@dataclass(frozen=True)
class LearnerParams:
    """Step sizes and trace decays.

    Defaults assume 8 active features per step (the default tile coder):
    critic rate 0.1/8 and actor rates 0.01/8.  Use :meth:`for_active_features`
    when the tiling count changes.
    """

    alpha_v: float = 0.1 / 8
    alpha_mu: float = 0.01 / 8
    alpha_sigma: float = 0.01 / 8
    gamma: float = 0.9
    lambda_w: float = 0.3
    lambda_v: float = 0.7
    sigma_floor: float = 0.01
    action_clip: float = 0.1

    def __post_init__(self):
        if self.alpha_v <= 0 or self.alpha_mu <= 0 or self.alpha_sigma <= 0:
            raise ValueError("step sizes must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 <= self.lambda_w <= 1.0 or not 0.0 <= self.lambda_v <= 1.0:
            raise ValueError("trace decays must lie in [0, 1]")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be positive")
        if self.action_clip <= 0:
            raise ValueError("action_clip must be positive")

    @classmethod
    def for_active_features(cls, m: int, **overrides) -> "LearnerParams":
        """Defaults normalized by the number of active features m."""
        base = {"alpha_v": 0.1 / m, "alpha_mu": 0.01 / m, "alpha_sigma": 0.01 / m}
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return {
            "alpha_v": self.alpha_v,
            "alpha_mu": self.alpha_mu,
            "alpha_sigma": self.alpha_sigma,
            "gamma": self.gamma,
            "lambda_w": self.lambda_w,
            "lambda_v": self.lambda_v,
            "sigma_floor": self.sigma_floor,
            "action_clip": self.action_clip,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerParams":
        return cls(**d)


@dataclass
class LearnerState:
    """Weight and eligibility arrays; single-writer, mutated in place."""

    w_mu: np.ndarray
    w_sigma: np.ndarray
    v: np.ndarray
    e_mu: np.ndarray
    e_sigma: np.ndarray
    e_v: np.ndarray

    @classmethod
    def zeros(cls, table_size: int) -> "LearnerState":
        return cls(*(np.zeros(table_size) for _ in range(6)))

    @property
    def table_size(self) -> int:
        return len(self.v)

    def copy(self) -> "LearnerState":
        return LearnerState(
            self.w_mu.copy(), self.w_sigma.copy(), self.v.copy(),
            self.e_mu.copy(), self.e_sigma.copy(), self.e_v.copy(),
        )

    _ARRAYS = ("w_mu", "w_sigma", "v", "e_mu", "e_sigma", "e_v")

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist() for name in self._ARRAYS}

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerState":
        return cls(*(np.asarray(d[name], dtype=np.float64) for name in cls._ARRAYS))


@dataclass(frozen=True)
class PolicySample:
    mu: float
    sigma: float           # post-floor, the spread actually sampled from
    action: float          # clipped displacement sent to the environment
    raw_action: float      # pre-clip Gaussian draw, used by the actor traces


def snapshot(state: LearnerState, params: LearnerParams) -> dict:
    """JSON-ready learner snapshot for crash dumps and session resume."""
    doc = {"params": params.to_dict()}
    doc.update(state.to_dict())
    return doc


def restore(doc: dict) -> tuple[LearnerState, LearnerParams]:
    return LearnerState.from_dict(doc), LearnerParams.from_dict(doc["params"])


def dump_snapshot(doc: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(doc, f)


def select_action(
    state: LearnerState,
    fv: FeatureVector,
    params: LearnerParams,
    rng: np.random.Generator,
) -> PolicySample:
    """Draw an action from the linear-Gaussian policy at the given features."""
    mu = dot(state.w_mu, fv)
    sigma_exponent = dot(state.w_sigma, fv)
    if not (math.isfinite(mu) and math.isfinite(sigma_exponent)):
        raise DivergenceError(
            f"non-finite policy output: mu={mu}, sigma exponent={sigma_exponent}",
            snapshot(state, params),
        )
    try:
        sigma = math.exp(sigma_exponent)
    except OverflowError:
        raise DivergenceError(
            f"sigma overflow: exponent={sigma_exponent}", snapshot(state, params)
        ) from None
    sigma = max(sigma, params.sigma_floor)
    raw_action = float(rng.normal(mu, sigma))
    action = min(max(raw_action, -params.action_clip), params.action_clip)
    return PolicySample(mu=mu, sigma=sigma, action=action, raw_action=raw_action)


def update(
    state: LearnerState,
    fv_s: FeatureVector,
    sample: PolicySample,
    reward: float,
    fv_s2: FeatureVector,
    params: LearnerParams,
) -> float:
    """One actor-critic update; returns the TD error.

    The critic trace decays by lambda_v * gamma and is clamped elementwise
    to [0, 1].  Actor traces use the pre-clip draw, so the increments are
    the score of the Gaussian actually sampled (scaled by sigma^2).
    """
    v_s = dot(state.v, fv_s)
    v_s2 = dot(state.v, fv_s2)
    delta = reward + params.gamma * v_s2 - v_s
    if not math.isfinite(delta):
        raise DivergenceError(
            f"non-finite TD error: r={reward}, v(s)={v_s}, v(s')={v_s2}",
            snapshot(state, params),
        )
    idx = fv_s.indices

    state.e_v *= params.lambda_v * params.gamma
    state.e_v[idx] += 1.0
    np.minimum(state.e_v, 1.0, out=state.e_v)
    state.v += params.alpha_v * delta * state.e_v

    a_err = sample.raw_action - sample.mu
    state.e_mu *= params.lambda_w
    state.e_mu[idx] += a_err
    state.w_mu += params.alpha_mu * delta * state.e_mu

    state.e_sigma *= params.lambda_w
    state.e_sigma[idx] += a_err * a_err - sample.sigma * sample.sigma
    state.w_sigma += params.alpha_sigma * delta * state.e_sigma
    return delta


def _log_density(state: LearnerState, fv: FeatureVector, action: float) -> float:
    """ln N(action; mu, sigma^2) with mu, sigma read off the weights (no floor)."""
    mu = dot(state.w_mu, fv)
    sigma = math.exp(dot(state.w_sigma, fv))
    z = action - mu
    return -0.5 * math.log(2.0 * math.pi * sigma * sigma) - z * z / (2.0 * sigma * sigma)


def log_prob_gradient_check(
    state: LearnerState,
    fv: FeatureVector,
    action: float,
    fd_step: float = 1e-6,
) -> float:
    """Validate the actor-trace increments against finite differences.

    The analytic increments (a - mu) and (a - mu)^2 - sigma^2 per active
    weight must equal sigma^2 times the numerical gradient of the log
    density with respect to that weight.  Only meaningful while sigma is
    strictly above the floor, where the exp parameterization is smooth.
    Returns the max relative error (denominator floored at 1e-3 so that
    near-zero increments compare absolutely).
    """
    mu = dot(state.w_mu, fv)
    sigma = math.exp(dot(state.w_sigma, fv))
    sig_sq = sigma * sigma
    a_err = action - mu
    analytic_mu = a_err
    analytic_sigma = a_err * a_err - sig_sq

    worst = 0.0
    for name, analytic in (("w_mu", analytic_mu), ("w_sigma", analytic_sigma)):
        weights = getattr(state, name)
        for i in fv.indices:
            original = weights[i]
            weights[i] = original + fd_step
            lp_plus = _log_density(state, fv, action)
            weights[i] = original - fd_step
            lp_minus = _log_density(state, fv, action)
            weights[i] = original
            numeric = sig_sq * (lp_plus - lp_minus) / (2.0 * fd_step)
            denom = max(abs(analytic), abs(numeric), 1e-3)
            worst = max(worst, abs(analytic - numeric) / denom)
    return worst


def gradient_sweep(
    num_samples: int,
    seed: int,
    tile_cfg=None,
    params: LearnerParams | None = None,
) -> float:
    """Worst gradient-check error over randomized states, weights, and actions.

    Samples keep sigma well above the floor so the comparison stays in the
    smooth regime of the parameterization.
    """
    from . import tile_coder

    tile_cfg = tile_cfg or tile_coder.TileCoderConfig()
    params = params or LearnerParams()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_samples):
        state = LearnerState.zeros(tile_cfg.table_size)
        while True:
            state.w_mu[:] = rng.normal(0.0, 0.2, size=state.table_size)
            state.w_sigma[:] = rng.normal(0.0, 0.2, size=state.table_size)
            emg = rng.uniform(*tile_cfg.ranges[0])
            angle = rng.uniform(*tile_cfg.ranges[1])
            fv = tile_coder.encode(emg, angle, tile_cfg)
            sigma = math.exp(dot(state.w_sigma, fv))
            if sigma > 2.0 * params.sigma_floor:
                break
        mu = dot(state.w_mu, fv)
        action = mu + sigma * rng.normal()
        worst = max(worst, log_prob_gradient_check(state, fv, action))
    return worst
