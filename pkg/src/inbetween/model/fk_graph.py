"""Differentiable quaternion/FK operations on engine tensors.

Mirrors the numpy versions in skeleton.py/quat.py, but built from autodiff
primitives so positional losses and critic features can backpropagate into
predicted rotations. Tensors hold quaternions as (..., 4) in (w, x, y, z).
"""
from __future__ import annotations

from ..engine import tensor as T
from ..engine.tensor import Tensor, concat


def _comps(q):
    return q[..., 0:1], q[..., 1:2], q[..., 2:3], q[..., 3:4]


def quat_mul_t(a: Tensor, b: Tensor) -> Tensor:
    aw, ax, ay, az = _comps(a)
    bw, bx, by, bz = _comps(b)
    w = aw * bw - ax * bx - ay * by - az * bz
    x = aw * bx + ax * bw + ay * bz - az * by
    y = aw * by - ax * bz + ay * bw + az * bx
    z = aw * bz + ax * by - ay * bx + az * bw
    return concat([w, x, y, z], axis=-1)


def _cross_t(a: Tensor, b: Tensor) -> Tensor:
    ax, ay, az = a[..., 0:1], a[..., 1:2], a[..., 2:3]
    bx, by, bz = b[..., 0:1], b[..., 1:2], b[..., 2:3]
    return concat([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx], axis=-1)


def quat_rotate_t(q: Tensor, v: Tensor) -> Tensor:
    """Rotate 3-vectors v (..., 3) by unit quaternions q (..., 4)."""
    qw = q[..., 0:1]
    qv = q[..., 1:]
    t = T.scale(_cross_t(qv, v), 2.0)
    return v + qw * t + _cross_t(qv, t)


def quat_normalize_t(q: Tensor) -> Tensor:
    """Normalize quaternion blocks (..., j, 4) along the last axis."""
    norm = T.sqrt(T.sum_(T.square(q), axis=-1, keepdims=True))
    return T.div(q, norm)


def fk_tensors(skeleton, q: Tensor, root: Tensor):
    """FK over stacked frames: q (N, j, 4), root (N, 3).

    Returns (positions, rotations): per-joint lists of (N, 3) and (N, 4)
    tensors in joint order.
    """
    j = skeleton.joint_count
    offsets = skeleton.offsets
    positions = [root]
    rotations = [q[:, 0, :]]
    for k in range(1, j):
        par = int(skeleton.parent[k])
        bone = Tensor(offsets[k][None, :])
        positions.append(positions[par] + quat_rotate_t(rotations[par], bone))
        rotations.append(quat_mul_t(rotations[par], q[:, k, :]))
    return positions, rotations


def fk_positions_flat(skeleton, q: Tensor, root: Tensor) -> Tensor:
    """Global positions flattened to (N, j*3)."""
    positions, _ = fk_tensors(skeleton, q, root)
    return concat(positions, axis=1)
