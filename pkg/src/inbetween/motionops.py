"""Sequence-level motion operations: canonicalization, mirroring, contacts."""
from __future__ import annotations

import warnings

import numpy as np

from . import quat
from .skeleton import FrameState, MotionClip, fk_positions

# Facing of the character: the root's local +Z axis rotated into world space,
# projected onto the horizontal (XZ) plane. Configurable because different
# rigs disagree on which local axis points forward.
DEFAULT_FORWARD_AXIS = np.array([0.0, 0.0, 1.0])

CONTACT_SPEED_THRESHOLD = 0.2  # length units per frame, tuned for 30 fps


def facing_yaw(root_q, forward_axis=DEFAULT_FORWARD_AXIS, eps=1e-8):
    """Yaw quaternion that turns the root's horizontal facing onto +X.

    Returns (yaw, degenerate): degenerate is True when the forward axis points
    (near-)vertically and no yaw is well defined.
    """
    f = quat.rotate(root_q, forward_axis)
    fx, fz = float(f[0]), float(f[2])
    if fx * fx + fz * fz < eps * eps:
        return quat.IDENTITY.copy(), True
    return quat.yaw_about_y(np.arctan2(fz, fx)), False


def rotate_frames(frames: list[FrameState], yaw) -> list[FrameState]:
    """Apply a yaw rotation (about the world origin) to every frame."""
    roots = quat.rotate(yaw, np.stack([f.root for f in frames]))
    root_qs = quat.normalize(quat.mul(yaw, np.stack([f.q[0] for f in frames])))
    out = []
    for t, f in enumerate(frames):
        g = f.copy()
        g.q[0] = root_qs[t]
        g.root = roots[t]
        out.append(g)
    return out


def canonicalize_frames(frames: list[FrameState], pivot_frame: int, forward_axis=DEFAULT_FORWARD_AXIS):
    """Frame-list form of canonicalize; returns (frames, applied_yaw)."""
    if not 0 <= pivot_frame < len(frames):
        raise IndexError(f"pivot frame {pivot_frame} outside sequence of {len(frames)} frames")
    yaw, degenerate = facing_yaw(frames[pivot_frame].q[0], forward_axis)
    if degenerate:
        warnings.warn("root forward axis is vertical at pivot; canonicalization skipped")
        return [f.copy() for f in frames], yaw
    return rotate_frames(frames, yaw), yaw


def canonicalize(clip: MotionClip, pivot_frame: int, forward_axis=DEFAULT_FORWARD_AXIS):
    """Rotate a clip about Y so the root faces +X at `pivot_frame`.

    The same yaw is applied to every frame's root quaternion and root position
    (about the world origin). Returns (rotated clip, applied_yaw) so callers
    can rotate generated results back with the inverse yaw.
    """
    frames, yaw = canonicalize_frames(clip.frames, pivot_frame, forward_axis)
    return clip.with_frames(frames), yaw


def mirror_frames(skeleton, frames: list[FrameState]) -> list[FrameState]:
    """Frame-list form of mirror."""
    if skeleton.mirror_map is None:
        raise ValueError("skeleton has no mirror map")
    mm = skeleton.mirror_map
    out = []
    for f in frames:
        q = quat.mirror_x(f.q)[mm]
        root = f.root.copy()
        root[0] = -root[0]
        contacts = f.contacts[[2, 3, 0, 1]]  # (LF, LT, RF, RT) -> swap sides
        out.append(FrameState(q, root, contacts))
    return out


def mirror(clip: MotionClip) -> MotionClip:
    """Mirror a clip across the YZ plane (x -> -x).

    Root positions get their X negated, quaternions map (w,x,y,z) ->
    (w,x,-y,-z), and left/right joint channels and contact flags are swapped
    per the skeleton's mirror map.
    """
    return clip.with_frames(mirror_frames(clip.skeleton, clip.frames))


def joint_speeds(clip: MotionClip, joints) -> np.ndarray:
    """Global speed (length units/frame) of selected joints via FK.

    Central differences, one-sided at the clip boundaries. Returns (T, len(joints)).
    """
    if len(clip) < 2:
        raise ValueError("need at least 2 frames to estimate speeds")
    p = fk_positions(clip.skeleton, clip.frames)[:, list(joints)]  # (T, n, 3)
    v = np.empty_like(p)
    v[1:-1] = (p[2:] - p[:-2]) / 2.0
    v[0] = p[1] - p[0]
    v[-1] = p[-1] - p[-2]
    return np.linalg.norm(v, axis=-1)


def extract_contacts(clip: MotionClip, speed_threshold: float = CONTACT_SPEED_THRESHOLD) -> np.ndarray:
    """Binary contact flags (T, 4) for the skeleton's foot joints.

    A foot joint is in contact on frames where its global speed is below
    speed_threshold.
    """
    if clip.skeleton.foot_joints is None:
        raise ValueError("skeleton has no foot joints configured")
    speeds = joint_speeds(clip, clip.skeleton.foot_joints)
    return (speeds < speed_threshold).astype(float)


def with_extracted_contacts(clip: MotionClip, speed_threshold: float = CONTACT_SPEED_THRESHOLD) -> MotionClip:
    """Copy of the clip with contact flags filled in from foot velocities."""
    c = extract_contacts(clip, speed_threshold)
    frames = [FrameState(f.q.copy(), f.root.copy(), c[t]) for t, f in enumerate(clip.frames)]
    return clip.with_frames(frames)
