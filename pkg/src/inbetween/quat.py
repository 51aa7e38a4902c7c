"""Quaternion algebra for character animation.

Quaternions are numpy arrays laid out as (w, x, y, z). All functions accept
arrays of shape (..., 4) and broadcast over leading axes. Rotations follow the
Hamilton convention: rotate(q, v) = q * (0, v) * conj(q), right-handed.
"""
from __future__ import annotations

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


class DegenerateQuaternionError(ValueError):
    """Raised when an operation receives a (near-)zero-norm quaternion."""


def normalize(q, eps=1e-15):
    """Scale q to unit norm, preserving direction.

    Raises DegenerateQuaternionError on zero-norm input.
    """
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n <= eps):
        raise DegenerateQuaternionError("cannot normalize zero-norm quaternion")
    return q / n


def conjugate(q):
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def mul(a, b):
    """Hamilton product a * b (composition: rotate by b, then by a)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def rotate(q, v):
    """Rotate 3-vector(s) v by unit quaternion(s) q."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    qw = q[..., 0]
    qx, qy, qz = q[..., 1], q[..., 2], q[..., 3]
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    # q v q* expanded: v + 2 w (qv x v) + 2 qv x (qv x v), crosses inlined
    tx = 2.0 * (qy * vz - qz * vy)
    ty = 2.0 * (qz * vx - qx * vz)
    tz = 2.0 * (qx * vy - qy * vx)
    return np.stack(
        [
            vx + qw * tx + qy * tz - qz * ty,
            vy + qw * ty + qz * tx - qx * tz,
            vz + qw * tz + qx * ty - qy * tx,
        ],
        axis=-1,
    )


def from_axis_angle(axis, angle):
    """Unit quaternion for a rotation of `angle` radians about `axis`."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n <= 1e-15:
        raise DegenerateQuaternionError("rotation axis has zero length")
    axis = axis / n
    half = float(angle) / 2.0
    return np.concatenate([[np.cos(half)], axis * np.sin(half)])


def to_matrix(q):
    """3x3 rotation matrix for unit quaternion q (single quaternion)."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


_AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


def from_euler(order, angles_deg):
    """Quaternion from intrinsic Euler rotations applied in `order`.

    `order` is a string like "ZXY" naming the rotation axes in application
    order (matching BVH channel order); `angles_deg` are the corresponding
    angles in degrees. Composition is R(order[0]) * R(order[1]) * ...
    """
    angles = np.asarray(angles_deg, dtype=float)
    q = IDENTITY.copy()
    for axis_name, angle in zip(order, np.deg2rad(angles)):
        axis = np.zeros(3)
        axis[_AXIS_INDEX[axis_name]] = 1.0
        q = mul(q, from_axis_angle(axis, angle))
    return q


def to_euler(q, order):
    """Euler angles (degrees) in `order` whose from_euler reproduces q.

    Generic axis decomposition via the rotation matrix; handles the gimbal
    degeneracy by zeroing the third angle.
    """
    m = to_matrix(normalize(q))
    i = _AXIS_INDEX[order[0]]
    j = _AXIS_INDEX[order[1]]
    k = _AXIS_INDEX[order[2]]
    if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        # cyclic (right-handed) orders
        a = np.arctan2(-m[j, k], m[k, k])
        b = np.arcsin(np.clip(m[i, k], -1.0, 1.0))
        c = np.arctan2(-m[i, j], m[i, i])
        if abs(m[i, k]) > 1.0 - 1e-12:
            a = np.arctan2(m[k, j], m[j, j])
            c = 0.0
    else:
        # anti-cyclic orders
        a = np.arctan2(m[j, k], m[k, k])
        b = -np.arcsin(np.clip(m[i, k], -1.0, 1.0))
        c = np.arctan2(m[i, j], m[i, i])
        if abs(m[i, k]) > 1.0 - 1e-12:
            a = np.arctan2(-m[k, j], m[j, j])
            c = 0.0
    return np.rad2deg(np.array([a, b, c]))


def slerp(a, b, t, lerp_threshold=0.9995):
    """Spherical linear interpolation between unit quaternions a and b.

    Takes the shortest arc (sign of b flipped when dot(a, b) < 0). Near
    parallel endpoints fall back to normalized linear interpolation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(np.dot(a, b))
    if d < 0.0:
        b = -b
        d = -d
    if d > lerp_threshold:
        return normalize(a + t * (b - a))
    theta = np.arccos(np.clip(d, -1.0, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - t) * theta) * a + np.sin(t * theta) * b) / s


def yaw_about_y(angle):
    """Quaternion for a rotation of `angle` radians about the +Y (up) axis."""
    return np.array([np.cos(angle / 2.0), 0.0, np.sin(angle / 2.0), 0.0])


def mirror_x(q):
    """Quaternion of the rotation reflected across the YZ plane (x -> -x).

    For q = (w, x, y, z) the mirrored rotation is (w, x, -y, -z).
    """
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 2] = -out[..., 2]
    out[..., 3] = -out[..., 3]
    return out


def hemisphere_align(q, reference):
    """Flip sign of q where dot(q, reference) < 0 (double-cover alignment)."""
    q = np.asarray(q, dtype=float)
    reference = np.asarray(reference, dtype=float)
    d = np.sum(q * reference, axis=-1, keepdims=True)
    return np.where(d < 0.0, -q, q)


def angle_between(a, b):
    """Rotation angle in radians taking a to b (shortest way)."""
    d = abs(float(np.dot(normalize(a), normalize(b))))
    return 2.0 * np.arccos(np.clip(d, -1.0, 1.0))
