"""The recurrent transition generator.

Three feed-forward encoders (character state, offset-to-target, target) with
additive time-to-arrival embeddings, scheduled target noise on the combined
offset/target embedding, an LSTM, and a decoder emitting per-joint quaternion
deltas, a root-velocity delta, and contact logits. Rollouts warm the LSTM on
the seed frames with teacher inputs and then run autoregressively, consuming
their own predictions, while offsets against the fixed target keyframe are
recomputed every step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import engine
from ..engine import FeedForward, LSTMCell, Tensor
from ..engine import tensor as T
from .config import STATE_MODE_QUAT_VELOCITIES, GeneratorConfig
from .embeddings import noise_schedule, tta_embedding
from .fk_graph import quat_normalize_t
from ..windows import quat_velocities, root_velocities


class TransitionGenerator:
    def __init__(self, config: GeneratorConfig, rng):
        self.config = config
        c = config
        self.state_encoder = FeedForward(
            "state_enc", [c.state_input_dim, c.encoder_hidden, c.encoder_out], rng, "plu"
        )
        self.offset_encoder = FeedForward(
            "offset_enc", [c.offset_input_dim, c.encoder_hidden, c.encoder_out], rng, "plu"
        )
        self.target_encoder = FeedForward(
            "target_enc", [c.target_input_dim, c.encoder_hidden, c.encoder_out], rng, "plu"
        )
        self.lstm = LSTMCell("lstm", c.lstm_input_dim, c.lstm_hidden, rng)
        self.decoder = FeedForward(
            "decoder",
            [c.lstm_hidden, c.decoder_hidden, c.decoder_hidden2, c.decoder_output_dim],
            rng,
            "plu",
            activate_last=False,
        )

    def parameters(self):
        return (
            self.state_encoder.parameters()
            + self.offset_encoder.parameters()
            + self.target_encoder.parameters()
            + self.lstm.parameters()
            + self.decoder.parameters()
        )

    def encode_target(self, target_q_flat) -> Tensor:
        """Encode the target keyframe once per rollout (it never changes)."""
        return self.target_encoder(Tensor(target_q_flat))

    def _modulate(self, h_state, h_offset, h_target, tta, z_target):
        c = self.config
        if c.use_tta:
            z_tta = Tensor(tta_embedding(tta, c.tta_dim, c.basis, c.t_max_tta))
            h_state = h_state + z_tta
            if c.tta_all_encoders:
                h_offset = h_offset + z_tta
                h_target = h_target + z_tta
        joined = T.concat([h_offset, h_target], axis=1)
        if z_target is not None:
            lam = noise_schedule(tta)
            if lam > 0.0:
                joined = joined + Tensor(lam * z_target)
        return T.concat([h_state, joined], axis=1)

    def step(self, state_in: Tensor, offset_in: Tensor, h_target: Tensor, tta: int,
             z_target, lstm_state, decode: bool = True):
        """One generator timestep.

        Returns ((dq, dr, contact_probs) or None, next lstm_state); decode=False
        runs only the encoders and LSTM (seed warm-up).
        """
        h_state = self.state_encoder(state_in)
        h_offset = self.offset_encoder(offset_in)
        lstm_in = self._modulate(h_state, h_offset, h_target, tta, z_target)
        h, lstm_state = self.lstm(lstm_in, lstm_state)
        if not decode:
            return None, lstm_state
        out = self.decoder(h)
        j4 = self.config.joint_count * 4
        dq = out[:, :j4]
        dr = out[:, j4 : j4 + 3]
        contact_probs = T.sigmoid(out[:, j4 + 3 :]) if self.config.include_contacts else None
        return (dq, dr, contact_probs), lstm_state


@dataclass
class RolloutResult:
    """Predicted transition as per-step tensors (batch-major).

    q[k] is (B, j, 4), root[k] (B, 3), contacts[k] (B, 4). Index L holds the
    predicted target frame when predict_target was set.
    """

    q: list
    root: list
    contacts: list
    length: int
    predict_target: bool

    def arrays(self):
        """Stack to numpy: q (B, n, j, 4), root (B, n, 3), contacts (B, n, 4)."""
        q = np.stack([t.values for t in self.q], axis=1)
        root = np.stack([t.values for t in self.root], axis=1)
        if self.contacts:
            contacts = np.stack([t.values for t in self.contacts], axis=1)
        else:
            contacts = np.zeros((q.shape[0], q.shape[1], 4))
        return q, root, contacts


def rollout(generator: TransitionGenerator, seed_q, seed_root, seed_contacts,
            target_q, target_root, length: int, z_target=None,
            predict_target: bool = False) -> RolloutResult:
    """Generate a transition of `length` frames toward the target keyframe.

    seed_q (B, t_past, j, 4), seed_root (B, t_past, 3), seed_contacts
    (B, t_past, 4); target_q (B, j, 4), target_root (B, 3). z_target is an
    optional (B, z_target_dim) per-sequence noise draw. With predict_target
    the rollout runs one extra step (tta reaches 1) so the frame landing on
    the keyframe is also predicted; training losses use it.

    The LSTM state starts at zero and is warmed over the seed frames with
    teacher inputs; the transition is autoregressive. tta at the last seed
    input is length + 1 and decreases by one per step.
    """
    if length < 1:
        raise ValueError("transition length must be >= 1")
    cfg = generator.config
    b, t_past, j, _ = seed_q.shape
    if t_past != cfg.t_past:
        raise ValueError(f"expected {cfg.t_past} seed frames, got {t_past}")
    dtype = engine.default_dtype()
    seed_q = np.asarray(seed_q, dtype=dtype)
    seed_root = np.asarray(seed_root, dtype=dtype)
    seed_contacts = np.asarray(seed_contacts, dtype=dtype)
    target_q_flat = np.asarray(target_q, dtype=dtype).reshape(b, j * 4)
    target_root = np.asarray(target_root, dtype=dtype)

    qvel = quat_velocities(seed_q)
    rvel = root_velocities(seed_root)
    target_index = t_past + length

    h_target = generator.encode_target(target_q_flat)
    lstm_state = generator.lstm.initial_state(b)

    def teacher_state(i):
        q_part = qvel[:, i] if cfg.state_input_mode == STATE_MODE_QUAT_VELOCITIES else seed_q[:, i]
        parts = [q_part.reshape(b, -1), rvel[:, i]]
        if cfg.include_contacts:
            parts.append(seed_contacts[:, i])
        return Tensor(np.concatenate(parts, axis=1))

    def teacher_offset(i):
        o_r = target_root - seed_root[:, i]
        o_q = target_q_flat - seed_q[:, i].reshape(b, -1)
        return Tensor(np.concatenate([o_r, o_q], axis=1))

    # warm-up over all seed frames but the last (no decode, and no target
    # noise: the schedule governs generation steps, so short transitions stay
    # exactly noise-free)
    for i in range(t_past - 1):
        _, lstm_state = generator.step(
            teacher_state(i), teacher_offset(i), h_target, int(target_index - i),
            None, lstm_state, decode=False,
        )

    pred_q, pred_root, pred_contacts = [], [], []
    cur_q = Tensor(seed_q[:, -1])                       # (B, j, 4)
    cur_root = Tensor(seed_root[:, -1])                 # (B, 3)
    cur_contacts = Tensor(seed_contacts[:, -1])
    prev_q = Tensor(seed_q[:, -2]) if t_past > 1 else cur_q
    prev_root = Tensor(seed_root[:, -2]) if t_past > 1 else cur_root

    steps = length + 1 if predict_target else length
    for k in range(steps):
        i = t_past - 1 + k
        tta = target_index - i
        if cfg.state_input_mode == STATE_MODE_QUAT_VELOCITIES:
            q_part = T.reshape(cur_q - prev_q, (b, j * 4))
        else:
            q_part = T.reshape(cur_q, (b, j * 4))
        parts = [q_part, cur_root - prev_root]
        if cfg.include_contacts:
            parts.append(cur_contacts)
        state_in = T.concat(parts, axis=1)
        offset_in = T.concat(
            [Tensor(target_root) - cur_root, Tensor(target_q_flat) - T.reshape(cur_q, (b, j * 4))],
            axis=1,
        )
        (dq, dr, contact_probs), lstm_state = generator.step(
            state_in, offset_in, h_target, int(tta), z_target, lstm_state
        )
        next_q = quat_normalize_t(T.reshape(T.reshape(cur_q, (b, j * 4)) + dq, (b, j, 4)))
        next_root = cur_root + dr
        next_contacts = contact_probs if contact_probs is not None else Tensor(np.zeros((b, 4), dtype=dtype))
        pred_q.append(next_q)
        pred_root.append(next_root)
        pred_contacts.append(next_contacts)
        prev_q, prev_root = cur_q, cur_root
        cur_q, cur_root, cur_contacts = next_q, next_root, next_contacts
        if not np.all(np.isfinite(next_root.values)):
            raise FloatingPointError(f"non-finite activations at rollout step {k} (tta={tta})")

    return RolloutResult(pred_q, pred_root, pred_contacts, length, predict_target)


def rollout_frames(generator, skeleton, seed_frames, target_frame, length, z_target=None):
    """Inference rollout on FrameState lists; returns (frames, contact_probs).

    Runs with graph building disabled and returns exactly `length` frames.
    """
    from ..skeleton import FrameState

    seed_q = np.stack([f.q for f in seed_frames])[None]
    seed_root = np.stack([f.root for f in seed_frames])[None]
    seed_contacts = np.stack([f.contacts for f in seed_frames])[None]
    with engine.no_grad():
        result = rollout(
            generator, seed_q, seed_root, seed_contacts,
            target_frame.q[None], target_frame.root[None], length,
            z_target=z_target, predict_target=False,
        )
    q, root, contacts = result.arrays()
    frames = [FrameState(q[0, k], root[0, k], contacts[0, k]) for k in range(length)]
    return frames, contacts[0]
