"""Reconstruction and adversarial losses.

All reconstruction terms are L1, reduced by the mean over time steps and
feature dimensions (per-dimension means keep the published loss weights
balanced across differently sized vectors). The loss horizon covers the
transition frames plus the predicted target frame. Adversarial terms follow
the least-squares GAN objective on window-averaged critic scores.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import engine
from ..engine import Tensor
from ..engine import tensor as T
from ..skeleton import fk_positions
from .config import LossWeights
from .critics import SlidingCritic


@dataclass
class LossValues:
    quat: float
    root: float
    pos: float
    contacts: float
    total: float


def reconstruction_losses(pred_frames, truth_frames, skeleton, weights: LossWeights,
                          include_pos: bool = True, include_contacts: bool = True) -> LossValues:
    """L1 reconstruction losses between two frame sequences.

    quat: local quaternions; root: root positions; pos: FK global positions;
    contacts: contact channels. Each is the mean absolute difference over
    (time, dimensions); total applies the configured weights.
    """
    if len(pred_frames) != len(truth_frames):
        raise ValueError("sequences must have equal length")
    pq = np.stack([f.q for f in pred_frames])
    tq = np.stack([f.q for f in truth_frames])
    pr = np.stack([f.root for f in pred_frames])
    tr = np.stack([f.root for f in truth_frames])
    l_quat = float(np.abs(pq - tq).mean())
    l_root = float(np.abs(pr - tr).mean())
    l_pos = 0.0
    if include_pos:
        l_pos = float(np.abs(fk_positions(skeleton, pred_frames) - fk_positions(skeleton, truth_frames)).mean())
    l_contacts = 0.0
    if include_contacts:
        pc = np.stack([f.contacts for f in pred_frames])
        tc = np.stack([f.contacts for f in truth_frames])
        l_contacts = float(np.abs(pc - tc).mean())
    total = (
        weights.quat * l_quat
        + weights.root * l_root
        + (weights.pos * l_pos if include_pos else 0.0)
        + (weights.contacts * l_contacts if include_contacts else 0.0)
    )
    return LossValues(l_quat, l_root, l_pos, l_contacts, total)


def l1_mean(diff: Tensor) -> Tensor:
    return T.mean(T.abs_(diff))


def lsgan_generator_loss(fake_scores: list) -> Tensor:
    """0.5 * mean((D(fake) - 1)^2), averaged over critics."""
    terms = [T.scale(T.mean(T.square(s - 1.0)), 0.5) for s in fake_scores]
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return T.scale(total, 1.0 / len(terms))


def lsgan_critic_loss(real_scores: list, fake_scores: list) -> Tensor:
    """0.5 * mean((D(real) - 1)^2) + 0.5 * mean(D(fake)^2), averaged over critics."""
    terms = []
    for r, f in zip(real_scores, fake_scores):
        terms.append(T.scale(T.mean(T.square(r - 1.0)), 0.5) + T.scale(T.mean(T.square(f)), 0.5))
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return T.scale(total, 1.0 / len(terms))


def adversarial_losses(critics: list[SlidingCritic], real_features: list[np.ndarray],
                       fake_features: list[np.ndarray]):
    """(L_gen, L_disc) for assembled sequences, as floats.

    Both critics see the same sequences (past ++ transition ++ target
    context). real_features/fake_features: per-sequence (T, F) arrays.
    """
    with engine.no_grad():
        def batch_scores(critic, sequences):
            frames = [
                Tensor(np.stack([seq[t] for seq in sequences]))
                for t in range(sequences[0].shape[0])
            ]
            return critic.score(frames)

        real = [batch_scores(c, real_features) for c in critics]
        fake = [batch_scores(c, fake_features) for c in critics]
        l_gen = float(lsgan_generator_loss(fake).values)
        l_disc = float(lsgan_critic_loss(real, fake).values)
    return l_gen, l_disc
