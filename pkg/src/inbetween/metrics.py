"""Benchmark metrics: L2Q, L2P, NPSS.

L2Q and L2P are mean L2 distances of stacked global-quaternion / normalized
global-position vectors. NPSS is an earth-mover's distance between the
frequency-power distributions of the two sequences, aggregated with
ground-truth power weights.
"""
from __future__ import annotations

import numpy as np

from . import quat
from .skeleton import FrameState, Skeleton, fk_batch
from .windows import NormStats


class ZeroPowerError(ValueError):
    """Ground truth carries no spectral power in any dimension."""


def _global_arrays(skeleton, frames):
    q = np.stack([f.q for f in frames])
    root = np.stack([f.root for f in frames])
    return fk_batch(skeleton, q, root)


def global_quaternions(skeleton: Skeleton, frames: list[FrameState]) -> np.ndarray:
    return _global_arrays(skeleton, frames)[1]


def l2q_per_frame(pred, truth, skeleton, hemisphere: bool = True) -> np.ndarray:
    """Per-frame L2 distance of stacked global quaternions (T,)."""
    if len(pred) != len(truth):
        raise ValueError("sequences must have equal length")
    g_pred = global_quaternions(skeleton, pred)
    g_truth = global_quaternions(skeleton, truth)
    if hemisphere:
        g_pred = quat.hemisphere_align(g_pred, g_truth)
    diff = (g_pred - g_truth).reshape(len(pred), -1)
    return np.linalg.norm(diff, axis=1)


def l2q(pred, truth, skeleton, hemisphere: bool = True) -> float:
    """Mean L2 distance of global quaternions over the sequence.

    Hemisphere alignment (default on) flips predicted quaternion signs per
    joint and frame to match the ground truth, removing double-cover
    artifacts before differencing.
    """
    return float(l2q_per_frame(pred, truth, skeleton, hemisphere).mean())


def l2p_per_frame(pred, truth, skeleton, stats: NormStats) -> np.ndarray:
    """Per-frame L2 distance of centered, normalized global positions (T,).

    Both sequences are centered on the ground-truth window's horizontal root
    mean (the shared reference keeps the metric a pure difference), then
    normalized by the training statistics.
    """
    if len(pred) != len(truth):
        raise ValueError("sequences must have equal length")
    if stats is None:
        raise ValueError("l2p requires normalization statistics")
    p_pred = _global_arrays(skeleton, pred)[0]
    p_truth = _global_arrays(skeleton, truth)[0]
    center = p_truth[:, 0, [0, 2]].mean(axis=0)
    for p in (p_pred, p_truth):
        p[:, :, 0] -= center[0]
        p[:, :, 2] -= center[1]
    t = len(pred)
    n_pred = (p_pred.reshape(t, -1) - stats.mean) / stats.std
    n_truth = (p_truth.reshape(t, -1) - stats.mean) / stats.std
    return np.linalg.norm(n_pred - n_truth, axis=1)


def l2p(pred, truth, skeleton, stats: NormStats) -> float:
    return float(l2p_per_frame(pred, truth, skeleton, stats).mean())


def power_spectra(seq: np.ndarray) -> np.ndarray:
    """Squared DFT magnitudes per feature dimension, DC bin excluded.

    seq: (T, D); returns (T-1, D) unnormalized power.
    """
    coeffs = np.fft.fft(seq, axis=0)
    return np.abs(coeffs[1:]) ** 2


def npss_components(pred: np.ndarray, truth: np.ndarray):
    """Per-dimension EMD between normalized power spectra, plus truth powers.

    Returns (emd (D,), weights (D,)): weights are the ground truth's total
    power per dimension, the aggregation weights for npss.
    """
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("sequences must have equal shape")
    if len(pred) < 2:
        raise ValueError("npss needs at least 2 frames")
    p_pred = power_spectra(pred)
    p_truth = power_spectra(truth)
    total_pred = p_pred.sum(axis=0)
    total_truth = p_truth.sum(axis=0)
    norm_pred = np.divide(p_pred, total_pred, out=np.zeros_like(p_pred), where=total_pred > 0)
    norm_truth = np.divide(p_truth, total_truth, out=np.zeros_like(p_truth), where=total_truth > 0)
    emd = np.abs(np.cumsum(norm_pred, axis=0) - np.cumsum(norm_truth, axis=0)).sum(axis=0)
    return emd, total_truth


def npss(pred: np.ndarray, truth: np.ndarray) -> float:
    """Normalized power spectrum similarity between two (T, D) sequences.

    Power-weighted average of per-dimension spectral EMDs; weights are the
    ground truth's per-dimension total power. Errors out when the ground
    truth has zero power everywhere (the measure is undefined).
    """
    emd, weights = npss_components(pred, truth)
    total = weights.sum()
    if total <= 0.0:
        raise ZeroPowerError("ground truth has zero spectral power in every dimension")
    return float((emd * weights).sum() / total)


def quaternion_features(skeleton: Skeleton, frames: list[FrameState]) -> np.ndarray:
    """Global-quaternion components flattened to (T, j*4) for NPSS."""
    return global_quaternions(skeleton, frames).reshape(len(frames), -1)
