"""Two-bone inverse kinematics for foot placement.

Solves the hip-knee-foot chain analytically: interior angles from the law of
cosines, knee bend kept in its pre-existing bend plane, then a swing rotation
carries the foot onto the target. Out-of-reach targets are clamped to the
chain's reach.
"""
from __future__ import annotations

import numpy as np

from . import quat
from .skeleton import FrameState, Skeleton, fk


def _angle(u, v, eps=1e-12):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < eps or nv < eps:
        return 0.0
    return float(np.arccos(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)))


def _safe_axis(axis, fallback_dir, eps=1e-10):
    n = np.linalg.norm(axis)
    if n > eps:
        return axis / n
    # degenerate (straight chain): any axis perpendicular to fallback_dir works
    probe = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(probe, fallback_dir)) > 0.9 * np.linalg.norm(fallback_dir):
        probe = np.array([0.0, 1.0, 0.0])
    axis = np.cross(fallback_dir, probe)
    return axis / np.linalg.norm(axis)


def two_bone_ik(skeleton: Skeleton, frame: FrameState, foot_joint: int, target_pos, eps=1e-8) -> FrameState:
    """Return a frame whose FK places `foot_joint` at `target_pos`.

    foot_joint must sit on a 2-bone chain (hip -> knee -> foot). Only the hip
    and knee local quaternions change. Unreachable targets are clamped to the
    reach of the chain.
    """
    knee = int(skeleton.parent[foot_joint])
    hip = int(skeleton.parent[knee])
    if knee <= 0 or hip < 0:
        raise ValueError("foot joint needs two ancestors (hip-knee-foot chain)")
    target_pos = np.asarray(target_pos, dtype=float)

    res = fk(skeleton, frame)
    a, b, c = res.positions[hip], res.positions[knee], res.positions[foot_joint]
    lab = np.linalg.norm(b - a)
    lcb = np.linalg.norm(c - b)
    if lab < eps or lcb < eps:
        raise ValueError("two_bone_ik requires nonzero-length bones")
    lat = np.clip(np.linalg.norm(target_pos - a), eps, lab + lcb - eps)

    ac_ab_0 = _angle(c - a, b - a)
    ba_bc_0 = _angle(a - b, c - b)
    ac_at_0 = _angle(c - a, target_pos - a)

    ac_ab_1 = float(np.arccos(np.clip((lcb * lcb - lab * lab - lat * lat) / (-2.0 * lab * lat), -1.0, 1.0)))
    ba_bc_1 = float(np.arccos(np.clip((lat * lat - lab * lab - lcb * lcb) / (-2.0 * lab * lcb), -1.0, 1.0)))

    axis0 = _safe_axis(np.cross(c - a, b - a), c - a)
    axis1 = _safe_axis(np.cross(c - a, target_pos - a), c - a)

    g_hip, g_knee = res.rotations[hip], res.rotations[knee]
    # world-space correction axes expressed in each joint's local frame; the
    # swing r2 applies after r0, so it is localized by the post-r0 orientation
    r0 = quat.from_axis_angle(quat.rotate(quat.conjugate(g_hip), axis0), ac_ab_1 - ac_ab_0)
    r1 = quat.from_axis_angle(quat.rotate(quat.conjugate(g_knee), axis0), ba_bc_1 - ba_bc_0)
    g_hip_bent = quat.mul(g_hip, r0)
    r2 = quat.from_axis_angle(quat.rotate(quat.conjugate(g_hip_bent), axis1), ac_at_0)

    out = frame.copy()
    out.q[hip] = quat.normalize(quat.mul(frame.q[hip], quat.mul(r0, r2)))
    out.q[knee] = quat.normalize(quat.mul(frame.q[knee], r1))
    return out


def apply_contact_ik(skeleton: Skeleton, frames: list[FrameState], contact_probs: np.ndarray,
                     threshold: float = 0.5) -> list[FrameState]:
    """Lock feet during predicted contact runs.

    contact_probs: (T, 4) probabilities ordered like skeleton.foot_joints.
    For each contact run the foot is pinned to its position on the run's
    first frame via two_bone_ik. Toe flags are ignored (toes follow the foot).
    """
    if skeleton.foot_joints is None:
        raise ValueError("skeleton has no foot joints configured")
    out = [f.copy() for f in frames]
    contact_probs = np.asarray(contact_probs, dtype=float)
    # entries 0 and 2 of foot_joints are the left/right feet
    for slot in (0, 2):
        joint = int(skeleton.foot_joints[slot])
        lock_pos = None
        for t in range(len(out)):
            if contact_probs[t, slot] > threshold:
                if lock_pos is None:
                    lock_pos = fk(skeleton, out[t]).positions[joint]
                out[t] = two_bone_ik(skeleton, out[t], joint, lock_pos)
            else:
                lock_pos = None
    return out
