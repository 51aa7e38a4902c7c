"""Adversarial training of the transition generator.

Per minibatch: one critic update (least-squares discriminator loss on real vs
generated sequences, generated frames treated as constants), then one
generator update (weighted reconstruction losses plus the adversarial term,
backpropagated through the whole autoregressive rollout). Transition lengths
follow the curriculum; target noise is resampled per sequence; windows are
mirrored on the fly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import engine
from ..engine import AmsGrad, Tensor
from ..engine import tensor as T
from ..skeleton import fk_batch
from ..windows import TransitionWindow, assemble_example, critic_feature_dim
from .config import CurriculumState, GeneratorConfig, TrainingParams
from .critics import SlidingCritic, make_critics
from .embeddings import sample_target_noise
from .fk_graph import fk_tensors
from .generator import TransitionGenerator, rollout
from .losses import l1_mean, lsgan_critic_loss, lsgan_generator_loss

LOG_HEADER = "# iteration\tL_quat\tL_root\tL_pos\tL_contacts\tL_gen\tL_disc"


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainerState:
    """Everything needed to continue a run: networks, optimizers, counters, RNGs."""

    config: GeneratorConfig
    generator: TransitionGenerator
    critics: tuple[SlidingCritic, SlidingCritic] | None
    gen_opt: AmsGrad
    critic_opt: AmsGrad | None
    iteration: int
    data_rng: np.random.Generator
    noise_rng: np.random.Generator


def init_trainer(config: GeneratorConfig, params: TrainingParams,
                 critic_hidden=(512, 256)) -> TrainerState:
    seeds = np.random.SeedSequence(params.seed).spawn(3)
    init_rng = np.random.default_rng(seeds[0])
    generator = TransitionGenerator(config, init_rng)
    gen_opt = AmsGrad(generator.parameters(), lr=params.learning_rate,
                      beta1=params.beta1, beta2=params.beta2)
    critics = None
    critic_opt = None
    if config.use_adversarial:
        critics = make_critics(critic_feature_dim(config.joint_count), init_rng, critic_hidden)
        critic_opt = AmsGrad(critics[0].parameters() + critics[1].parameters(),
                             lr=params.learning_rate, beta1=params.beta1, beta2=params.beta2)
    return TrainerState(
        config=config,
        generator=generator,
        critics=critics,
        gen_opt=gen_opt,
        critic_opt=critic_opt,
        iteration=0,
        data_rng=np.random.default_rng(seeds[1]),
        noise_rng=np.random.default_rng(seeds[2]),
    )


def _batch_arrays(examples):
    def stack(attr):
        return np.stack([getattr(e, attr) for e in examples])

    return {k: stack(k) for k in ("q", "root", "contacts", "target_q", "target_root")}


def _batched_critic_features(skeleton, q, root):
    """Features for (B, S, j, 4) / (B, S, 3) ground-truth sequences -> (B, S, F)."""
    b, s, j, _ = q.shape
    p, _ = fk_batch(skeleton, q.reshape(b * s, j, 4), root.reshape(b * s, 3))
    p = p.reshape(b, s, j, 3)
    x = p[:, :, 1:] - p[:, :, 0:1]
    rvel = np.empty_like(root)
    rvel[:, 1:] = root[:, 1:] - root[:, :-1]
    rvel[:, 0] = root[:, 1] - root[:, 0]
    xvel = np.empty_like(x)
    xvel[:, 1:] = x[:, 1:] - x[:, :-1]
    xvel[:, 0] = x[:, 1] - x[:, 0]
    return np.concatenate([rvel, x.reshape(b, s, -1), xvel.reshape(b, s, -1)], axis=2)


def _fake_feature_frames(skeleton, result, batch, length, seed_q, seed_root, target_q, target_root,
                         positions_by_joint):
    """Per-frame critic feature tensors for seed ++ generated ++ target.

    Seed and target features come from ground truth (constants); the generated
    transition's features are graph tensors built from the rollout FK.
    positions_by_joint: per-joint (length+1)*B stacked position tensors from
    the loss FK pass (time-major rows).
    """
    t_past = seed_q.shape[1]
    j = seed_q.shape[2]
    b = batch
    seq_root, seq_x = [], []
    p_seed, _ = fk_batch(skeleton, seed_q.reshape(b * t_past, j, 4), seed_root.reshape(b * t_past, 3))
    p_seed = p_seed.reshape(b, t_past, j, 3)
    for i in range(t_past):
        seq_root.append(Tensor(seed_root[:, i]))
        x = p_seed[:, i, 1:] - p_seed[:, i, 0:1]
        seq_x.append(Tensor(x.reshape(b, -1)))
    for k in range(length):
        rows = slice(k * b, (k + 1) * b)
        seq_root.append(result.root[k])
        x_parts = [positions_by_joint[m][rows] - positions_by_joint[0][rows] for m in range(1, j)]
        seq_x.append(T.concat(x_parts, axis=1))
    p_target, _ = fk_batch(skeleton, target_q, target_root)
    seq_root.append(Tensor(target_root))
    seq_x.append(Tensor((p_target[:, 1:] - p_target[:, 0:1]).reshape(b, -1)))

    features = []
    for t in range(len(seq_root)):
        prev = max(t - 1, 0)
        nxt = min(t + 1, len(seq_root) - 1)
        if t == 0:
            rvel = seq_root[nxt] - seq_root[t]
            xvel = seq_x[nxt] - seq_x[t]
        else:
            rvel = seq_root[t] - seq_root[prev]
            xvel = seq_x[t] - seq_x[prev]
        features.append(T.concat([rvel, seq_x[t], xvel], axis=1))
    return features


def train_step(state: TrainerState, windows: list[TransitionWindow], params: TrainingParams,
               curriculum: CurriculumState):
    """One minibatch: critic update then generator update. Returns the log record."""
    cfg = state.config
    skeleton = windows[0].skeleton
    epoch = state.iteration // params.iterations_per_epoch
    length = curriculum.sample_length(state.data_rng, epoch)
    idx = state.data_rng.integers(0, len(windows), size=params.batch_size)
    examples = [
        assemble_example(windows[i], length, state.data_rng, params.mirror_probability)
        for i in idx
    ]
    batch = _batch_arrays(examples)
    t_past = cfg.t_past
    seed_q = batch["q"][:, :t_past]
    seed_root = batch["root"][:, :t_past]
    seed_contacts = batch["contacts"][:, :t_past]
    truth_q = batch["q"][:, t_past:]            # (B, L+1, j, 4) transition + target
    truth_root = batch["root"][:, t_past:]
    truth_contacts = batch["contacts"][:, t_past:]
    b = params.batch_size
    j = cfg.joint_count

    z = None
    if cfg.use_target_noise:
        z = sample_target_noise(state.noise_rng, b, cfg.z_target_dim, cfg.sigma_target)

    result = rollout(state.generator, seed_q, seed_root, seed_contacts,
                     batch["target_q"], batch["target_root"], length,
                     z_target=z, predict_target=True)
    n_steps = length + 1

    # time-major stacked predictions
    q_flat = T.concat([T.reshape(qk, (b, j * 4)) for qk in result.q], axis=0)
    root_flat = T.concat(result.root, axis=0)
    truth_q_flat = truth_q.transpose(1, 0, 2, 3).reshape(n_steps * b, j * 4)
    truth_root_flat = truth_root.transpose(1, 0, 2).reshape(n_steps * b, 3)

    l_quat = l1_mean(q_flat - truth_q_flat)
    l_root = l1_mean(root_flat - truth_root_flat)

    need_fk = cfg.use_position_loss or cfg.use_adversarial
    l_pos = None
    positions_by_joint = None
    if need_fk:
        q_stacked = T.concat(result.q, axis=0)          # (n_steps*B, j, 4)
        positions_by_joint, _ = fk_tensors(skeleton, q_stacked, root_flat)
        if cfg.use_position_loss:
            pos_flat = T.concat(positions_by_joint, axis=1)
            truth_p, _ = fk_batch(skeleton, truth_q.reshape(b * n_steps, j, 4),
                                  truth_root.reshape(b * n_steps, 3))
            truth_p = truth_p.reshape(b, n_steps, j * 3).transpose(1, 0, 2).reshape(n_steps * b, j * 3)
            l_pos = l1_mean(pos_flat - truth_p)

    l_contacts = None
    if cfg.include_contacts:
        c_flat = T.concat(result.contacts, axis=0)
        truth_c_flat = truth_contacts.transpose(1, 0, 2).reshape(n_steps * b, 4)
        l_contacts = l1_mean(c_flat - truth_c_flat)

    l_gen = None
    l_disc_value = 0.0
    if cfg.use_adversarial:
        long_c, short_c = state.critics
        # sequences: seed ++ transition ++ target (real vs generated transition)
        real_q = np.concatenate([seed_q, truth_q[:, :length], batch["target_q"][:, None]], axis=1)
        real_root = np.concatenate([seed_root, truth_root[:, :length], batch["target_root"][:, None]], axis=1)
        real_feats = _batched_critic_features(skeleton, real_q, real_root)
        pred_q_values, pred_root_values, _ = result.arrays()
        fake_q = np.concatenate([seed_q, pred_q_values[:, :length], batch["target_q"][:, None]], axis=1)
        fake_root = np.concatenate([seed_root, pred_root_values[:, :length], batch["target_root"][:, None]], axis=1)
        fake_feats_const = _batched_critic_features(skeleton, fake_q, fake_root)

        # critic update on constants
        state.critic_opt.zero_grad()
        s = real_feats.shape[1]
        real_frames = [Tensor(real_feats[:, t]) for t in range(s)]
        fake_frames = [Tensor(fake_feats_const[:, t]) for t in range(s)]
        real_scores = [long_c.score(real_frames), short_c.score(real_frames)]
        fake_scores = [long_c.score(fake_frames), short_c.score(fake_frames)]
        l_disc = lsgan_critic_loss(real_scores, fake_scores)
        l_disc_value = float(l_disc.values)
        l_disc.backward()
        state.critic_opt.step()

        # generator update sees the refreshed critics, with gradients flowing
        # through the generated features
        feature_frames = _fake_feature_frames(
            skeleton, result, b, length, seed_q, seed_root,
            batch["target_q"], batch["target_root"], positions_by_joint,
        )
        l_gen = lsgan_generator_loss([long_c.score(feature_frames), short_c.score(feature_frames)])

    w = params.loss_weights
    total = T.scale(l_quat, w.quat) + T.scale(l_root, w.root)
    if l_pos is not None:
        total = total + T.scale(l_pos, w.pos)
    if l_contacts is not None:
        total = total + T.scale(l_contacts, w.contacts)
    if l_gen is not None:
        total = total + T.scale(l_gen, w.gen)

    if not np.isfinite(float(total.values)):
        raise TrainingDiverged(f"non-finite loss at iteration {state.iteration}")

    state.gen_opt.zero_grad()
    total.backward()
    state.gen_opt.step()

    record = (
        state.iteration,
        float(l_quat.values),
        float(l_root.values),
        float(l_pos.values) if l_pos is not None else 0.0,
        float(l_contacts.values) if l_contacts is not None else 0.0,
        float(l_gen.values) if l_gen is not None else 0.0,
        l_disc_value,
    )
    state.iteration += 1
    return record


def format_log_record(record) -> str:
    it, *losses = record
    return "\t".join([str(it)] + [f"{v:.6f}" for v in losses])


def train(config: GeneratorConfig, windows: list[TransitionWindow], params: TrainingParams,
          state: TrainerState | None = None, log_sink=None, checkpoint_fn=None,
          critic_hidden=(512, 256), progress_fn=None):
    """Run training up to params.iterations; returns the TrainerState.

    log_sink: callable taking one formatted log line per iteration.
    checkpoint_fn: callable(state) invoked every params.checkpoint_every
    iterations (when > 0). Resumes transparently when `state` is given.
    """
    if not windows:
        raise ValueError("no training windows")
    if state is None:
        state = init_trainer(config, params, critic_hidden)
        if log_sink:
            log_sink(LOG_HEADER)
    curriculum = CurriculumState(p_max=config.p_max, p_min=params.p_min, n_ep_max=params.n_ep_max)
    usable = [w for w in windows if w.max_length >= config.p_max]
    if not usable:
        raise ValueError(f"no window offers a {config.p_max}-frame transition")
    while state.iteration < params.iterations:
        record = train_step(state, usable, params, curriculum)
        if log_sink:
            log_sink(format_log_record(record))
        if progress_fn and record[0] % params.log_every == 0:
            progress_fn(record)
        if checkpoint_fn and params.checkpoint_every > 0 and state.iteration % params.checkpoint_every == 0:
            checkpoint_fn(state)
    return state
