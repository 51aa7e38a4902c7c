"""Configuration for the transition generator, critics, losses, curriculum."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

STATE_MODE_QUATERNIONS = "quaternions"             # TG-Q
STATE_MODE_QUAT_VELOCITIES = "quaternion_velocities"  # TG-QV


@dataclass
class GeneratorConfig:
    joint_count: int = 22
    state_input_mode: str = STATE_MODE_QUATERNIONS
    include_contacts: bool = True
    encoder_hidden: int = 512
    encoder_out: int = 256
    lstm_hidden: int = 512          # the source architecture leaves this open
    decoder_hidden: int = 512
    decoder_hidden2: int = 256
    basis: float = 10000.0
    t_past: int = 10
    p_max: int = 30
    sigma_target: float = 0.5
    # ablation axes
    use_tta: bool = True
    tta_all_encoders: bool = True   # False: embedding on the state encoder only
    use_target_noise: bool = True
    use_position_loss: bool = True
    use_adversarial: bool = True

    def __post_init__(self):
        if self.state_input_mode not in (STATE_MODE_QUATERNIONS, STATE_MODE_QUAT_VELOCITIES):
            raise ValueError(f"unknown state_input_mode {self.state_input_mode!r}")
        if self.encoder_out % 2 != 0:
            raise ValueError("encoder_out must be even (sin/cos embedding pairs)")

    @property
    def t_max_tta(self) -> int:
        return self.p_max + self.t_past - 5

    @property
    def tta_dim(self) -> int:
        return self.encoder_out

    @property
    def z_target_dim(self) -> int:
        return 2 * self.encoder_out

    @property
    def state_input_dim(self) -> int:
        base = self.joint_count * 4 + 3
        return base + (4 if self.include_contacts else 0)

    @property
    def offset_input_dim(self) -> int:
        return 3 + self.joint_count * 4

    @property
    def target_input_dim(self) -> int:
        return self.joint_count * 4

    @property
    def lstm_input_dim(self) -> int:
        return 3 * self.encoder_out

    @property
    def decoder_output_dim(self) -> int:
        return self.joint_count * 4 + 3 + (4 if self.include_contacts else 0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(**d)


@dataclass
class LossWeights:
    quat: float = 1.0
    root: float = 1.0
    pos: float = 0.5
    gen: float = 0.1
    contacts: float = 0.1

    def __post_init__(self):
        for name, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"loss weight {name} must be nonnegative")


@dataclass
class CurriculumState:
    p_max: int = 30
    p_min: int = 5
    n_ep_max: int = 3       # epochs until the full transition length is reached

    def max_length(self, epoch: int) -> int:
        """Current curriculum cap on the transition length.

        Grows linearly from p_min at epoch 0 to p_max at epoch n_ep_max
        (rounded to nearest, half away from zero), then saturates.
        """
        if epoch < 0:
            raise ValueError("epoch must be >= 0")
        if epoch >= self.n_ep_max:
            return self.p_max
        exact = self.p_min + (self.p_max - self.p_min) * epoch / self.n_ep_max
        return min(self.p_max, int(exact + 0.5))

    def sample_length(self, rng, epoch: int) -> int:
        """Per-minibatch transition length ~ Uniform{p_min..max_length(epoch)}."""
        return int(rng.integers(self.p_min, self.max_length(epoch) + 1))


@dataclass
class TrainingParams:
    iterations: int = 1000
    batch_size: int = 32
    learning_rate: float = 0.001
    beta1: float = 0.5
    beta2: float = 0.9
    seed: int = 0
    iterations_per_epoch: int = 200
    n_ep_max: int = 3
    p_min: int = 5
    mirror_probability: float = 0.5
    log_every: int = 10
    checkpoint_every: int = 0   # 0: no intermediate checkpoints
    loss_weights: LossWeights = field(default_factory=LossWeights)
