"""Sliding-window motion critics.

Each critic is a feed-forward network evaluated on every contiguous window of
frame features (stride 1, no padding) -- the temporal-convolution view of a
window classifier -- and its per-window scalars are averaged into one score.
Input sequences include the ground-truth context around the transition, so
boundary windows condition on real frames.
"""
from __future__ import annotations

import numpy as np

from .. import engine
from ..engine import FeedForward, Tensor
from ..engine import tensor as T

LONG_CRITIC_WINDOW = 10
SHORT_CRITIC_WINDOW = 2


class SlidingCritic:
    def __init__(self, name, window: int, feature_dim: int, rng, hidden=(512, 256)):
        self.window = window
        self.feature_dim = feature_dim
        self.net = FeedForward(
            name, [window * feature_dim, hidden[0], hidden[1], 1], rng,
            activation="relu", activate_last=False,
        )

    def parameters(self):
        return self.net.parameters()

    def score(self, feature_frames: list) -> Tensor:
        """Mean per-window score over a feature sequence.

        feature_frames: per-frame (B, F) tensors; returns a (B, 1) tensor.
        All windows are stacked into one batch so the network runs once.
        """
        s = len(feature_frames)
        if s < self.window:
            raise ValueError(f"sequence of {s} frames shorter than critic window {self.window}")
        n_windows = s - self.window + 1
        windows = [
            T.concat(feature_frames[k : k + self.window], axis=1) for k in range(n_windows)
        ]
        stacked = T.concat(windows, axis=0)            # (n_windows*B, window*F)
        scores = self.net(stacked)                     # (n_windows*B, 1)
        batch = feature_frames[0].shape[0]
        per_window = T.reshape(scores, (n_windows, batch))
        return T.reshape(T.mean(per_window, axis=0), (batch, 1))


def make_critics(feature_dim: int, rng, hidden=(512, 256)):
    """The paper's two critics: long-term (10 frames) and short-term (2)."""
    long = SlidingCritic("critic_long", LONG_CRITIC_WINDOW, feature_dim, rng, hidden)
    short = SlidingCritic("critic_short", SHORT_CRITIC_WINDOW, feature_dim, rng, hidden)
    return long, short


def critic_score(critic: SlidingCritic, features: np.ndarray) -> float:
    """Score one feature sequence (T, F): mean of the per-window scalars."""
    with engine.no_grad():
        frames = [Tensor(features[t : t + 1]) for t in range(features.shape[0])]
        return float(critic.score(frames).values[0, 0])
