"""BVH motion capture file parsing and writing.

Supports the common HIERARCHY/MOTION layout: per-joint OFFSET, 3 or 6
CHANNELS (rotation order taken from the channel declaration), End Sites, and
one motion row per frame. Euler angles are degrees; quaternions come out in
(w, x, y, z) layout.
"""
from __future__ import annotations

import warnings

import numpy as np

from . import quat
from .skeleton import FrameState, MotionClip, Skeleton


class BvhError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_POSITION_CHANNELS = {"Xposition": 0, "Yposition": 1, "Zposition": 2}
_ROTATION_CHANNELS = {"Xrotation": "X", "Yrotation": "Y", "Zrotation": "Z"}


def derive_mirror_map(names: list[str]) -> np.ndarray:
    """Pair joints whose names differ only by a Left/Right marker."""
    mapping = np.arange(len(names))
    index = {n: i for i, n in enumerate(names)}
    for i, name in enumerate(names):
        for a, b in (("Left", "Right"), ("left", "right"), ("LEFT", "RIGHT")):
            if a in name:
                partner = name.replace(a, b)
                if partner in index:
                    mapping[i] = index[partner]
                break
            if b in name:
                partner = name.replace(b, a)
                if partner in index:
                    mapping[i] = index[partner]
                break
    return mapping


def derive_foot_joints(names: list[str]) -> np.ndarray | None:
    """Find (left foot, left toe, right foot, right toe) by name, or None.

    Rigs without left/right markers but with exactly one foot and one toe
    (single-leg chains) fall back to using that pair for both sides.
    """
    def find(side, part):
        for i, n in enumerate(names):
            low = n.lower()
            if side in low and part in low:
                return i
        return None

    idx = [find("left", "foot"), find("left", "toe"), find("right", "foot"), find("right", "toe")]
    if not any(i is None for i in idx):
        return np.array(idx, dtype=int)
    feet = [i for i, n in enumerate(names) if "foot" in n.lower()]
    toes = [i for i, n in enumerate(names) if "toe" in n.lower()]
    if len(feet) == 1 and len(toes) == 1:
        return np.array([feet[0], toes[0], feet[0], toes[0]], dtype=int)
    return None


def parse_bvh(text: str, fallback_fps: float = 30.0):
    """Parse BVH text into (Skeleton, MotionClip).

    Raises BvhError (with a line number) on malformed headers, channel-count
    mismatches, or non-finite values.
    """
    lines = text.splitlines()
    stripped = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not stripped:
        raise BvhError("empty file")
    pos = 0

    def peek():
        return stripped[pos] if pos < len(stripped) else (len(lines), "")

    def advance():
        nonlocal pos
        lineno, ln = peek()
        pos += 1
        return lineno, ln

    lineno, ln = advance()
    if ln != "HIERARCHY":
        raise BvhError("expected HIERARCHY", lineno)

    names: list[str] = []
    parents: list[int] = []
    offsets: list[np.ndarray] = []
    rotation_orders: list[str] = []
    channel_layout: list[tuple[int, str]] = []   # (joint index, channel name) in file order
    end_sites: dict[int, np.ndarray] = {}
    stack: list[int] = []
    ignored_positions = 0

    def parse_offset():
        lineno, ln = advance()
        parts = ln.split()
        if parts[0] != "OFFSET" or len(parts) != 4:
            raise BvhError("expected OFFSET with 3 values", lineno)
        try:
            return np.array([float(v) for v in parts[1:]])
        except ValueError:
            raise BvhError("bad OFFSET value", lineno) from None

    while True:
        lineno, ln = advance()
        if ln == "MOTION":
            break
        tokens = ln.split()
        if not tokens:
            continue
        if tokens[0] in ("ROOT", "JOINT"):
            if tokens[0] == "ROOT" and names:
                raise BvhError("multiple ROOT joints", lineno)
            if tokens[0] == "JOINT" and not stack:
                raise BvhError("JOINT outside hierarchy", lineno)
            idx = len(names)
            names.append(" ".join(tokens[1:]))
            parents.append(stack[-1] if stack else -1)
            lineno, ln = advance()
            if ln != "{":
                raise BvhError("expected '{' after joint name", lineno)
            stack.append(idx)
            offsets.append(parse_offset())
            lineno, ln = advance()
            parts = ln.split()
            if parts[0] != "CHANNELS":
                raise BvhError("expected CHANNELS", lineno)
            try:
                n_channels = int(parts[1])
            except (IndexError, ValueError):
                raise BvhError("bad CHANNELS count", lineno) from None
            channels = parts[2:]
            if len(channels) != n_channels:
                raise BvhError(f"CHANNELS declares {n_channels} but lists {len(channels)}", lineno)
            order = ""
            for ch in channels:
                if ch in _ROTATION_CHANNELS:
                    order += _ROTATION_CHANNELS[ch]
                elif ch not in _POSITION_CHANNELS:
                    raise BvhError(f"unknown channel {ch!r}", lineno)
                channel_layout.append((idx, ch))
            if len(order) != 3:
                raise BvhError("expected exactly 3 rotation channels per joint", lineno)
            if idx != 0 and any(ch in _POSITION_CHANNELS for ch in channels):
                ignored_positions += 1
            rotation_orders.append(order)
        elif tokens[0] == "End":
            lineno2, ln2 = advance()
            if ln2 != "{":
                raise BvhError("expected '{' after End Site", lineno2)
            end_sites[stack[-1]] = parse_offset()
            lineno2, ln2 = advance()
            if ln2 != "}":
                raise BvhError("expected '}' closing End Site", lineno2)
        elif tokens[0] == "}":
            if not stack:
                raise BvhError("unbalanced '}'", lineno)
            stack.pop()
        else:
            raise BvhError(f"unexpected token {tokens[0]!r} in hierarchy", lineno)
    if stack:
        raise BvhError("hierarchy not closed before MOTION", lineno)
    if not names:
        raise BvhError("no joints declared", lineno)
    if ignored_positions:
        warnings.warn(
            f"{ignored_positions} non-root joints declare position channels; "
            "values are read but ignored (bones use the header offsets)"
        )

    lineno, ln = advance()
    if not ln.startswith("Frames:"):
        raise BvhError("expected 'Frames:'", lineno)
    try:
        n_frames = int(ln.split(":")[1])
    except (IndexError, ValueError):
        raise BvhError("bad frame count", lineno) from None
    lineno, ln = advance()
    if not ln.startswith("Frame Time:"):
        raise BvhError("expected 'Frame Time:'", lineno)
    try:
        frame_time = float(ln.split(":")[1])
    except (IndexError, ValueError):
        raise BvhError("bad frame time", lineno) from None
    fps = 1.0 / frame_time if frame_time > 0 else fallback_fps

    j = len(names)
    frames: list[FrameState] = []
    for _ in range(n_frames):
        lineno, ln = advance()
        if not ln:
            raise BvhError("missing motion row", lineno)
        try:
            values = [float(v) for v in ln.split()]
        except ValueError:
            raise BvhError("non-numeric value in motion row", lineno) from None
        if len(values) != len(channel_layout):
            raise BvhError(
                f"motion row has {len(values)} values, header declares {len(channel_layout)} channels", lineno
            )
        if not np.all(np.isfinite(values)):
            raise BvhError("non-finite value in motion row", lineno)
        root = np.zeros(3)
        euler = np.zeros((j, 3))
        cursor = {k: 0 for k in range(j)}
        for (joint, ch), v in zip(channel_layout, values):
            if ch in _POSITION_CHANNELS:
                if joint == 0:
                    root[_POSITION_CHANNELS[ch]] = v
            else:
                euler[joint, cursor[joint]] = v
                cursor[joint] += 1
        q = np.stack([quat.from_euler(rotation_orders[k], euler[k]) for k in range(j)])
        frames.append(FrameState(q, root))
    if not frames:
        raise BvhError("no motion frames", lineno)

    skeleton = Skeleton(
        parent=np.array(parents),
        offsets=np.stack(offsets),
        names=names,
        mirror_map=derive_mirror_map(names),
        foot_joints=derive_foot_joints(names),
    )
    skeleton.rotation_orders = rotation_orders
    skeleton.end_sites = end_sites
    return skeleton, MotionClip(skeleton, frames, fps=fps)


def _joint_block(skeleton, k, depth, out):
    indent = "\t" * depth
    kind = "ROOT" if k == 0 else "JOINT"
    out.append(f"{indent}{kind} {skeleton.names[k]}")
    out.append(indent + "{")
    ox, oy, oz = skeleton.offsets[k]
    out.append(f"{indent}\tOFFSET {ox:.6f} {oy:.6f} {oz:.6f}")
    order = _rotation_orders(skeleton)[k]
    rot = " ".join(f"{ax}rotation" for ax in order)
    if k == 0:
        out.append(f"{indent}\tCHANNELS 6 Xposition Yposition Zposition {rot}")
    else:
        out.append(f"{indent}\tCHANNELS 3 {rot}")
    children = skeleton.children(k)
    if not children:
        end = getattr(skeleton, "end_sites", {}).get(k, np.zeros(3))
        out.append(f"{indent}\tEnd Site")
        out.append(indent + "\t{")
        out.append(f"{indent}\t\tOFFSET {end[0]:.6f} {end[1]:.6f} {end[2]:.6f}")
        out.append(indent + "\t}")
    for c in children:
        _joint_block(skeleton, c, depth + 1, out)
    out.append(indent + "}")


def _rotation_orders(skeleton):
    orders = getattr(skeleton, "rotation_orders", None)
    if orders is None:
        orders = ["ZYX"] * skeleton.joint_count
    return orders


def write_bvh(clip: MotionClip) -> str:
    """Serialize a clip to BVH text. Root gets 6 channels, other joints 3."""
    skeleton = clip.skeleton
    out: list[str] = ["HIERARCHY"]
    _joint_block(skeleton, 0, 0, out)
    out.append("MOTION")
    out.append(f"Frames: {len(clip)}")
    out.append(f"Frame Time: {1.0 / clip.fps:.8f}")
    orders = _rotation_orders(skeleton)
    for f in clip.frames:
        row = [f"{v:.6f}" for v in f.root]
        for k in range(skeleton.joint_count):
            row.extend(f"{v:.6f}" for v in quat.to_euler(f.q[k], orders[k]))
        out.append(" ".join(row))
    return "\n".join(out) + "\n"
