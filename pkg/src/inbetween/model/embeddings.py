"""Additive latent modifiers: time-to-arrival embedding and target-noise schedule."""
from __future__ import annotations

import numpy as np

# Noise schedule: fully on this many frames or more before arrival, linearly
# decaying across the ramp, and off for the final noise-free frames.
NOISE_FREE_FRAMES = 5
NOISE_RAMP_FRAMES = 25
NOISE_FULL_TTA = NOISE_FREE_FRAMES + NOISE_RAMP_FRAMES  # 30

_embedding_cache: dict = {}


def tta_embedding(tta: int, d: int, basis: float = 10000.0, t_max_tta: int | None = None) -> np.ndarray:
    """Sinusoidal embedding of the time-to-arrival.

    z[2i] = sin(t / basis^(2i/d)), z[2i+1] = cos(t / basis^(2i/d)) with
    t = min(tta, t_max_tta). Clamping keeps the embedding constant for
    horizons beyond those seen in training.
    """
    if tta < 1:
        raise ValueError("tta must be >= 1")
    if d % 2 != 0:
        raise ValueError("embedding dimension must be even")
    t = tta if t_max_tta is None else min(tta, t_max_tta)
    key = (t, d, basis)
    cached = _embedding_cache.get(key)
    if cached is not None:
        return cached
    i = np.arange(d // 2)
    angles = t / basis ** (2.0 * i / d)
    z = np.empty(d)
    z[0::2] = np.sin(angles)
    z[1::2] = np.cos(angles)
    z.setflags(write=False)
    _embedding_cache[key] = z
    return z


def noise_schedule(tta: int) -> float:
    """Target-noise multiplier lambda(tta) in [0, 1].

    1 for tta >= 30, (tta - 5)/25 for 5 <= tta < 30, 0 below 5.
    """
    if tta < 0:
        raise ValueError("tta must be >= 0")
    if tta >= NOISE_FULL_TTA:
        return 1.0
    if tta >= NOISE_FREE_FRAMES:
        return (tta - NOISE_FREE_FRAMES) / NOISE_RAMP_FRAMES
    return 0.0


def sample_target_noise(rng, batch: int, dim: int, sigma: float) -> np.ndarray | None:
    """Per-sequence Gaussian target noise; None when sigma is 0."""
    if sigma <= 0.0:
        return None
    return rng.normal(0.0, sigma, size=(batch, dim))
