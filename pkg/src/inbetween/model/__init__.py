from .config import (
    STATE_MODE_QUAT_VELOCITIES,
    STATE_MODE_QUATERNIONS,
    CurriculumState,
    GeneratorConfig,
    LossWeights,
    TrainingParams,
)
from .critics import SlidingCritic, critic_score, make_critics
from .embeddings import noise_schedule, sample_target_noise, tta_embedding
from .generator import RolloutResult, TransitionGenerator, rollout, rollout_frames
from .losses import LossValues, adversarial_losses, reconstruction_losses
from .training import (
    LOG_HEADER,
    TrainerState,
    TrainingDiverged,
    format_log_record,
    init_trainer,
    train,
    train_step,
)

__all__ = [
    "STATE_MODE_QUAT_VELOCITIES", "STATE_MODE_QUATERNIONS", "CurriculumState",
    "GeneratorConfig", "LossWeights", "TrainingParams", "SlidingCritic",
    "critic_score", "make_critics", "noise_schedule", "sample_target_noise",
    "tta_embedding", "RolloutResult", "TransitionGenerator", "rollout",
    "rollout_frames", "LossValues", "adversarial_losses", "reconstruction_losses",
    "LOG_HEADER", "TrainerState", "TrainingDiverged", "format_log_record",
    "init_trainer", "train", "train_step",
]
