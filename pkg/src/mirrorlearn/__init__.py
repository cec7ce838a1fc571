"""Actor-critic mirror training: simulator, metrics, and live session service."""

from .actor_critic import DivergenceError, LearnerParams, LearnerState
from .experiment import Condition, ExperimentConfig, RunDiverged, StepRecord, run
from .mirror_env import EnvConfig
from .tile_coder import TileCoderConfig, encode
from .trainer_sim import EmgModel, FeedbackEvent, FeedbackModel

__all__ = [
    "Condition",
    "DivergenceError",
    "EmgModel",
    "EnvConfig",
    "ExperimentConfig",
    "FeedbackEvent",
    "FeedbackModel",
    "LearnerParams",
    "LearnerState",
    "RunDiverged",
    "StepRecord",
    "TileCoderConfig",
    "encode",
    "run",
]
