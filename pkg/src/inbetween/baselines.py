"""Non-learned transition baselines."""
from __future__ import annotations

import numpy as np

from . import quat
from .skeleton import FrameState


def interpolate_baseline(last_seed: FrameState, target: FrameState, length: int) -> list[FrameState]:
    """Linear root interpolation + per-joint slerp between the gap endpoints.

    Interpolation parameter t = k/(length+1) for k = 1..length, so the curve
    hits the endpoints exactly one frame outside the generated range.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    j = last_seed.q.shape[0]
    frames = []
    for k in range(1, length + 1):
        t = k / (length + 1)
        q = np.stack([quat.slerp(last_seed.q[m], target.q[m], t) for m in range(j)])
        root = (1.0 - t) * last_seed.root + t * target.root
        contacts = last_seed.contacts if t < 0.5 else target.contacts
        frames.append(FrameState(q, root, contacts.copy()))
    return frames


def zero_velocity_baseline(last_seed: FrameState, length: int) -> list[FrameState]:
    """The last seed frame repeated through the whole gap."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return [last_seed.copy() for _ in range(length)]
