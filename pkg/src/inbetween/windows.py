"""Window extraction, normalization statistics, and model-ready examples.

A stored window is seed frames + the longest usable ground-truth transition +
the target keyframe + optional trailing future frames. Shorter transition
lengths reinterpret the same window: the effective target is the frame right
after the clipped transition.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .motionops import canonicalize_frames, mirror_frames
from .skeleton import FrameState, MotionClip, Skeleton, fk_batch

T_PAST = 10


@dataclass
class WindowSpec:
    window_length: int
    stride: int
    subjects: tuple[str, ...] | None = None   # None: all subjects

    def __post_init__(self):
        if self.window_length <= 0 or self.stride <= 0:
            raise ValueError("window_length and stride must be positive")


@dataclass
class TransitionWindow:
    skeleton: Skeleton
    seed: list[FrameState]          # t_past frames of past context
    transition: list[FrameState]    # ground-truth gap (maximum usable length)
    target: FrameState              # keyframe immediately after `transition`
    future: list[FrameState] = field(default_factory=list)

    @property
    def t_past(self) -> int:
        return len(self.seed)

    @property
    def max_length(self) -> int:
        return len(self.transition)

    def frames(self) -> list[FrameState]:
        return self.seed + self.transition + [self.target] + self.future

    def clipped(self, length: int) -> "TransitionWindow":
        """Reinterpret the window for a transition of `length` frames."""
        if not 1 <= length <= self.max_length:
            raise ValueError(f"length {length} outside [1, {self.max_length}]")
        if length == self.max_length:
            return self
        rest = self.transition[length + 1 :] + [self.target] + self.future
        return TransitionWindow(
            self.skeleton, self.seed, self.transition[:length], self.transition[length], rest
        )


def make_windows(clips, spec: WindowSpec, t_past: int = T_PAST, future_frames: int = 0):
    """Slice clips into canonicalized transition windows.

    Windows start at offsets 0, stride, 2*stride, ...; each is canonicalized
    at its last seed frame. Clips shorter than the window are skipped and
    counted. Layout: t_past seed + transition + target + future_frames-1
    trailing frames (the target is the first of the `future_frames` tail when
    future_frames > 0, matching stats-window conventions).
    """
    w = spec.window_length
    transition_len = w - t_past - 1 - max(future_frames - 1, 0)
    if transition_len < 1:
        raise ValueError("window too short for seed + transition + target")
    windows: list[TransitionWindow] = []
    skipped = 0
    for clip in clips:
        if spec.subjects is not None and clip.subject not in spec.subjects:
            continue
        if len(clip) < w:
            skipped += 1
            continue
        for start in range(0, len(clip) - w + 1, spec.stride):
            chunk = clip.frames[start : start + w]
            chunk, _ = canonicalize_frames(chunk, t_past - 1)
            windows.append(
                TransitionWindow(
                    skeleton=clip.skeleton,
                    seed=chunk[:t_past],
                    transition=chunk[t_past : t_past + transition_len],
                    target=chunk[t_past + transition_len],
                    future=chunk[t_past + transition_len + 1 :],
                )
            )
    return windows, skipped


@dataclass
class NormStats:
    """Per-dimension statistics of horizontally centered global positions."""

    mean: np.ndarray   # (j*3,)
    std: np.ndarray    # (j*3,)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.maximum(np.asarray(self.std, dtype=float), 1e-8)

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"]), np.array(d["std"]))


def centered_positions(skeleton: Skeleton, frames: list[FrameState]) -> np.ndarray:
    """FK positions with the window-mean of the root's XZ subtracted from all
    joints' XZ. Returns (T, j, 3)."""
    q = np.stack([f.q for f in frames])
    root = np.stack([f.root for f in frames])
    p, _ = fk_batch(skeleton, q, root)
    center = p[:, 0, [0, 2]].mean(axis=0)
    p[:, :, 0] -= center[0]
    p[:, :, 2] -= center[1]
    return p


def compute_norm_stats(windows: list[TransitionWindow]) -> NormStats:
    """Accumulate mean/std of centered global positions over training windows."""
    if not windows:
        raise ValueError("cannot compute statistics from zero windows")
    total = None
    total_sq = None
    count = 0
    for w in windows:
        p = centered_positions(w.skeleton, w.frames()).reshape(len(w.frames()), -1)
        if total is None:
            total = p.sum(axis=0)
            total_sq = (p * p).sum(axis=0)
        else:
            total += p.sum(axis=0)
            total_sq += (p * p).sum(axis=0)
        count += p.shape[0]
    mean = total / count
    var = np.maximum(total_sq / count - mean * mean, 0.0)
    return NormStats(mean=mean, std=np.sqrt(var))


def root_velocities(root: np.ndarray) -> np.ndarray:
    """Per-frame root velocity r_t - r_{t-1}; forward difference at frame 0."""
    v = np.empty_like(root)
    v[1:] = root[1:] - root[:-1]
    v[0] = root[1] - root[0] if len(root) > 1 else 0.0
    return v


def quat_velocities(q: np.ndarray) -> np.ndarray:
    """Element-wise quaternion differences q_t - q_{t-1}; forward diff at 0."""
    v = np.empty_like(q)
    v[1:] = q[1:] - q[:-1]
    v[0] = q[1] - q[0] if len(q) > 1 else 0.0
    return v


@dataclass
class ModelInputs:
    """Teacher-forced view of one window at a fixed transition length.

    Arrays span frames 0..t_past+L (seed, transition, target). Offsets are
    plain element-wise differences from the target; tta[i] counts frames until
    the target index.
    """

    q: np.ndarray          # (N, j, 4)
    root: np.ndarray       # (N, 3)
    contacts: np.ndarray   # (N, 4)
    rvel: np.ndarray       # (N, 3)
    qvel: np.ndarray       # (N, j, 4)
    offset_r: np.ndarray   # (N, 3) target root - root
    offset_q: np.ndarray   # (N, j, 4) target q - q
    target_q: np.ndarray   # (j, 4)
    target_root: np.ndarray  # (3,)
    tta: np.ndarray        # (N,) ints, (t_past + L) - i
    t_past: int
    length: int
    mirrored: bool


def assemble_example(window: TransitionWindow, length: int, rng=None,
                     mirror_probability: float = 0.0) -> ModelInputs:
    """Build model-ready arrays for one window and transition length.

    In training mode (rng given) the mirrored variant is emitted with
    `mirror_probability`; mirrored frames are re-canonicalized at the last
    seed frame so the facing-+X convention survives the reflection.
    """
    if length > window.max_length:
        raise ValueError(f"length {length} exceeds window transition {window.max_length}")
    clipped = window.clipped(length)
    frames = clipped.seed + clipped.transition + [clipped.target]
    mirrored = False
    if rng is not None and mirror_probability > 0 and rng.random() < mirror_probability:
        frames = mirror_frames(window.skeleton, frames)
        frames, _ = canonicalize_frames(frames, clipped.t_past - 1)
        mirrored = True
    q = np.stack([f.q for f in frames])
    root = np.stack([f.root for f in frames])
    contacts = np.stack([f.contacts for f in frames])
    n = len(frames)
    return ModelInputs(
        q=q,
        root=root,
        contacts=contacts,
        rvel=root_velocities(root),
        qvel=quat_velocities(q),
        offset_r=root[-1] - root,
        offset_q=q[-1] - q,
        target_q=q[-1],
        target_root=root[-1],
        tta=(n - 1) - np.arange(n),
        t_past=clipped.t_past,
        length=length,
        mirrored=mirrored,
    )


def critic_features_batch(skeleton: Skeleton, q: np.ndarray, root: np.ndarray) -> np.ndarray:
    """Critic features for stacked frames: q (T, j, 4), root (T, 3) -> (T, F).

    Per frame: global root velocity (3) ++ root-relative positions of non-root
    joints ((j-1)*3) ++ their velocities ((j-1)*3). Velocities use backward
    differences with a forward difference on frame 0.
    """
    p, _ = fk_batch(skeleton, q, root)
    x = p[:, 1:] - p[:, 0:1]            # root-relative positions
    T = q.shape[0]
    rvel = root_velocities(root)
    xvel = np.empty_like(x)
    if T > 1:
        xvel[1:] = x[1:] - x[:-1]
        xvel[0] = x[1] - x[0]
    else:
        xvel[0] = 0.0
    return np.concatenate([rvel, x.reshape(T, -1), xvel.reshape(T, -1)], axis=1)


def critic_features(skeleton: Skeleton, frames: list[FrameState]) -> np.ndarray:
    """Per-frame critic feature vectors for a frame list; dimension 3+2*(j-1)*3."""
    if len(frames) < 2:
        raise ValueError("critic features need at least 2 frames")
    q = np.stack([f.q for f in frames])
    root = np.stack([f.root for f in frames])
    return critic_features_batch(skeleton, q, root)


def critic_feature_dim(joint_count: int) -> int:
    return 3 + 2 * (joint_count - 1) * 3


def write_manifest(clips: list[MotionClip], sources: list[str]) -> str:
    """Plain-text dataset inventory: subject, action, source file, frames, fps."""
    lines = ["# subject\taction\tsource\tframes\tfps"]
    for clip, src in zip(clips, sources):
        lines.append(f"{clip.subject}\t{clip.action}\t{src}\t{len(clip)}\t{clip.fps:g}")
    return "\n".join(lines) + "\n"
