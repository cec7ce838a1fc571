"""Simulated control channel, simulated trainer, and feedback smear tests."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mirrorlearn import trainer_sim
from mirrorlearn.mirror_env import EnvConfig, target_angle
from mirrorlearn.trainer_sim import (
    SOURCE_SIMULATED,
    EmgModel,
    FeedbackEvent,
    FeedbackModel,
    ShapingState,
    combine,
    ideal_emg,
    shaping_step,
    simulated_emg,
    simulated_feedback,
)

ENV = EnvConfig()
FB = FeedbackModel()


class ScriptedRng:
    """Stands in for a Generator; replays a fixed script of uniform draws."""

    def __init__(self, draws):
        self.draws = list(draws)

    def random(self):
        return self.draws.pop(0)


# --- control channel ---------------------------------------------------------


def test_ideal_emg_tracks_rescaled_target():
    assert ideal_emg(0, ENV) == 0.0
    assert ideal_emg(300, ENV) == 1.0
    assert ideal_emg(12, ENV) == pytest.approx(12 / 25)
    assert ideal_emg(500, ENV) == 0.0


@given(t=st.integers(min_value=0, max_value=5 * 800))
def test_ideal_emg_in_unit_interval(t):
    assert 0.0 <= ideal_emg(t, ENV) <= 1.0


def test_noise_free_emg_equals_ideal():
    rng = np.random.default_rng(0)
    model = EmgModel(noise_std=0.0, lag_steps=0)
    for t in (0, 12, 100, 410, 799):
        assert simulated_emg(t, rng, model, ENV) == ideal_emg(t, ENV)


def test_lagged_emg_shifts_the_trace():
    rng = np.random.default_rng(0)
    model = EmgModel(noise_std=0.0, lag_steps=20)
    assert simulated_emg(120, rng, model, ENV) == ideal_emg(100, ENV)
    # before the lag has elapsed the trace holds its starting value
    assert simulated_emg(10, rng, model, ENV) == ideal_emg(0, ENV)


def test_default_emg_model_is_lag_free():
    assert EmgModel() == EmgModel(noise_std=0.05, lag_steps=0)


def test_simulated_emg_clipped_to_unit_interval():
    rng = np.random.default_rng(3)
    model = EmgModel(noise_std=5.0)  # absurd noise to force excursions
    values = [simulated_emg(t, rng, model, ENV) for t in range(200)]
    assert all(0.0 <= v <= 1.0 for v in values)


def test_simulated_emg_stays_near_ideal_on_average():
    rng = np.random.default_rng(11)
    model = EmgModel()
    devs = [
        abs(simulated_emg(t, rng, model, ENV) - ideal_emg(t, ENV))
        for t in range(2 * ENV.period)
    ]
    assert np.mean(devs) < 0.1


def test_simulated_emg_draws_once_per_call():
    # stream alignment: n calls must consume exactly n normal draws
    model = EmgModel()
    a = np.random.default_rng(5)
    b = np.random.default_rng(5)
    for t in range(50):
        simulated_emg(t, a, model, ENV)
        b.normal(0.0, model.noise_std)
    assert a.random() == b.random()


# --- simulated trainer -------------------------------------------------------


def test_feedback_correct_reward():
    event = simulated_feedback(True, ScriptedRng([0.05, 0.5]), FB, t=7)
    assert event == FeedbackEvent(t=7, value=1.0, source=SOURCE_SIMULATED)


def test_feedback_incorrect_flips_value():
    event = simulated_feedback(True, ScriptedRng([0.05, 0.9]), FB)
    assert event.value == FB.punish_value
    event = simulated_feedback(False, ScriptedRng([0.05, 0.9]), FB)
    assert event.value == FB.reward_value


def test_feedback_correct_punishment_when_out_of_band():
    event = simulated_feedback(False, ScriptedRng([0.05, 0.5]), FB)
    assert event.value == FB.punish_value


def test_no_feedback_consumes_single_draw():
    rng = ScriptedRng([0.2, 0.99])
    assert simulated_feedback(True, rng, FB) is None
    assert rng.draws == [0.99]  # the correctness draw must not have happened


def test_feedback_rate_matches_probability():
    rng = np.random.default_rng(123)
    events = [simulated_feedback(True, rng, FB, t=t) for t in range(10_400)]
    count = sum(e is not None for e in events)
    assert 940 <= count <= 1140  # ~3.3 sigma around Binomial(10400, 0.1) mean


# --- smear -------------------------------------------------------------------


def test_smear_sequence_reaches_exact_zero():
    state, h = shaping_step(ShapingState(), FeedbackEvent(0, 1.0, SOURCE_SIMULATED), FB)
    assert h == 1.0
    seq = [h]
    for _ in range(600):
        state, h = shaping_step(state, None, FB)
        seq.append(h)
        if h == 0.0:
            break
    assert seq[-1] == 0.0
    assert len(seq) == 460                      # zero lands on step 459
    assert seq[:-1] == pytest.approx([0.99**n for n in range(459)])
    assert all(a > b for a, b in zip(seq[:-1], seq[1:]))  # strictly decreasing


def test_smear_scales_with_event_value():
    state, h = shaping_step(ShapingState(), FeedbackEvent(0, -0.5, SOURCE_SIMULATED), FB)
    assert h == -0.5
    state, h = shaping_step(state, None, FB)
    assert h == pytest.approx(-0.495)


def test_new_event_replaces_carried_value():
    state, _ = shaping_step(ShapingState(), FeedbackEvent(0, 1.0, SOURCE_SIMULATED), FB)
    for _ in range(4):
        state, _ = shaping_step(state, None, FB)
    state, h = shaping_step(state, FeedbackEvent(5, -0.5, SOURCE_SIMULATED), FB)
    assert h == -0.5  # replacement, not accumulation


def test_no_event_no_shaping():
    state, h = shaping_step(ShapingState(), None, FB)
    assert h == 0.0
    assert state.carried == 0.0


@given(value=st.sampled_from([1.0, -0.5]), gap=st.integers(min_value=0, max_value=500))
def test_smear_magnitude_never_exceeds_event(value, gap):
    state, h = shaping_step(ShapingState(), FeedbackEvent(0, value, SOURCE_SIMULATED), FB)
    for _ in range(gap):
        state, h = shaping_step(state, None, FB)
    assert abs(h) <= abs(value)


def test_combine_is_plain_addition():
    assert combine(1.0, 0.99) == 1.99
    assert combine(-0.2, 0.0) == -0.2
    assert combine(0.0, -0.5) == -0.5


# --- model validation --------------------------------------------------------


def test_event_round_trip():
    event = FeedbackEvent(t=3, value=-0.5, source="human")
    assert FeedbackEvent.from_dict(event.to_dict()) == event


def test_emg_model_round_trip():
    model = EmgModel(noise_std=0.02, lag_steps=5)
    assert EmgModel.from_dict(model.to_dict()) == model


def test_feedback_model_round_trip():
    assert FeedbackModel.from_dict(FB.to_dict()) == FB


@pytest.mark.parametrize(
    "kwargs",
    [
        {"p_feedback": 1.5},
        {"p_correct": -0.1},
        {"reward_value": -1.0},
        {"punish_value": 0.5},
        {"smear_decay": 1.0},
    ],
)
def test_bad_feedback_model_rejected(kwargs):
    with pytest.raises(ValueError):
        FeedbackModel(**kwargs)


@pytest.mark.parametrize("kwargs", [{"noise_std": -0.1}, {"lag_steps": -1}])
def test_bad_emg_model_rejected(kwargs):
    with pytest.raises(ValueError):
        EmgModel(**kwargs)
