"""Skeleton and per-frame character state, with forward kinematics.

Conventions: joint 0 is the root; `parent[0]` is -1. Local quaternions are
joint-local except the root's, which is the global orientation. Y is up,
lengths are in the skeleton's native units.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quat

ROOT_PARENT = -1


@dataclass
class Skeleton:
    """Joint hierarchy with constant local bone offsets.

    parent must be topologically sorted (parent[k] < k). mirror_map is an
    involution pairing left/right joints; foot_joints lists the four contact
    joints as (left foot, left toe, right foot, right toe).
    """

    parent: np.ndarray                 # (j,) int, root entry is -1
    offsets: np.ndarray                # (j, 3) bone translations b
    names: list[str]
    mirror_map: np.ndarray | None = None   # (j,) int involution
    foot_joints: np.ndarray | None = None  # (4,) int

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=int)
        self.offsets = np.asarray(self.offsets, dtype=float)
        if self.mirror_map is not None:
            self.mirror_map = np.asarray(self.mirror_map, dtype=int)
        if self.foot_joints is not None:
            self.foot_joints = np.asarray(self.foot_joints, dtype=int)
        self.validate()

    @property
    def joint_count(self) -> int:
        return len(self.parent)

    def validate(self):
        j = self.joint_count
        if self.offsets.shape != (j, 3):
            raise ValueError(f"offsets shape {self.offsets.shape}, expected ({j}, 3)")
        if len(self.names) != j:
            raise ValueError("names length does not match joint count")
        if self.parent[0] != ROOT_PARENT:
            raise ValueError("joint 0 must be the root (parent -1)")
        for k in range(1, j):
            if not 0 <= self.parent[k] < k:
                raise ValueError(f"parent of joint {k} must be < {k} (topological order)")
        if self.mirror_map is not None:
            m = self.mirror_map
            if len(m) != j or np.any(m[m] != np.arange(j)):
                raise ValueError("mirror_map must be an involution over joint indices")
        if self.foot_joints is not None and (
            len(self.foot_joints) != 4 or np.any(self.foot_joints >= j) or np.any(self.foot_joints < 0)
        ):
            raise ValueError("foot_joints must hold 4 valid joint indices")

    def children(self, k: int) -> list[int]:
        return [c for c in range(self.joint_count) if self.parent[c] == k]

    def chain_to_root(self, k: int) -> list[int]:
        chain = [k]
        while self.parent[chain[-1]] != ROOT_PARENT:
            chain.append(int(self.parent[chain[-1]]))
        return chain

    def height(self) -> float:
        """Vertical extent of the rest pose (identity rotations, root at its offset)."""
        rest = FrameState(
            q=np.tile(quat.IDENTITY, (self.joint_count, 1)),
            root=self.offsets[0].copy(),
            contacts=np.zeros(4),
        )
        p = fk(self, rest).positions[:, 1]
        return float(p.max() - p.min())


@dataclass
class FrameState:
    """One frame of character state: local quaternions, root position, contacts."""

    q: np.ndarray          # (j, 4) unit quaternions, (w, x, y, z)
    root: np.ndarray       # (3,) global root position
    contacts: np.ndarray = field(default_factory=lambda: np.zeros(4))  # (4,) in [0, 1]

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.root = np.asarray(self.root, dtype=float)
        self.contacts = np.asarray(self.contacts, dtype=float)

    def copy(self) -> "FrameState":
        return FrameState(self.q.copy(), self.root.copy(), self.contacts.copy())


@dataclass
class MotionClip:
    """A sequence of frames on one skeleton, at uniform fps."""

    skeleton: Skeleton
    frames: list[FrameState]
    fps: float = 30.0
    subject: str = ""
    action: str = ""

    def __post_init__(self):
        if not self.frames:
            raise ValueError("MotionClip needs at least one frame")
        j = self.skeleton.joint_count
        for t, f in enumerate(self.frames):
            if f.q.shape != (j, 4):
                raise ValueError(f"frame {t}: quaternion block shape {f.q.shape}, expected ({j}, 4)")

    def __len__(self) -> int:
        return len(self.frames)

    def q_array(self) -> np.ndarray:
        return np.stack([f.q for f in self.frames])

    def root_array(self) -> np.ndarray:
        return np.stack([f.root for f in self.frames])

    def contacts_array(self) -> np.ndarray:
        return np.stack([f.contacts for f in self.frames])

    def with_frames(self, frames: list[FrameState]) -> "MotionClip":
        return MotionClip(self.skeleton, frames, self.fps, self.subject, self.action)


@dataclass
class FkResult:
    positions: np.ndarray   # (j, 3) global joint positions
    rotations: np.ndarray   # (j, 4) global joint quaternions


def fk(skeleton: Skeleton, frame: FrameState) -> FkResult:
    """Forward kinematics for a single frame.

    g[k] = g[parent] * q[k]; p[k] = p[parent] + rotate(g[parent], b[k]);
    the root uses the frame's root position and its quaternion directly.
    """
    j = skeleton.joint_count
    if frame.q.shape != (j, 4):
        raise ValueError(f"frame has {frame.q.shape[0]} joints, skeleton has {j}")
    p = np.zeros((j, 3))
    g = np.zeros((j, 4))
    p[0] = frame.root
    g[0] = frame.q[0]
    for k in range(1, j):
        par = skeleton.parent[k]
        p[k] = p[par] + quat.rotate(g[par], skeleton.offsets[k])
        g[k] = quat.mul(g[par], frame.q[k])
    return FkResult(p, g)


def fk_batch(skeleton: Skeleton, q: np.ndarray, root: np.ndarray):
    """Vectorized FK over a stack of frames.

    q: (T, j, 4), root: (T, 3). Returns (positions (T, j, 3), rotations (T, j, 4)).
    """
    T, j = q.shape[0], skeleton.joint_count
    p = np.zeros((T, j, 3))
    g = np.zeros((T, j, 4))
    p[:, 0] = root
    g[:, 0] = q[:, 0]
    for k in range(1, j):
        par = skeleton.parent[k]
        p[:, k] = p[:, par] + quat.rotate(g[:, par], skeleton.offsets[k])
        g[:, k] = quat.mul(g[:, par], q[:, k])
    return p, g


def fk_positions(skeleton: Skeleton, frames: list[FrameState]) -> np.ndarray:
    """Global positions (T, j, 3) for a list of frames."""
    q = np.stack([f.q for f in frames])
    root = np.stack([f.root for f in frames])
    return fk_batch(skeleton, q, root)[0]


def fk_rotations(skeleton: Skeleton, frames: list[FrameState]) -> np.ndarray:
    """Global quaternions (T, j, 4) for a list of frames."""
    q = np.stack([f.q for f in frames])
    root = np.stack([f.root for f in frames])
    return fk_batch(skeleton, q, root)[1]
