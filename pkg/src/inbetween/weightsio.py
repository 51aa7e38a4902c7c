"""Versioned binary container for model weights.

Layout: magic, format version, JSON header (skeleton, generator config,
normalization stats, block index, metadata), raw little-endian float32
parameter blocks, and a trailing SHA-256 over everything before it. Loads are
rejected on magic/version mismatch, truncation, or checksum failure.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .model.config import GeneratorConfig
from .skeleton import Skeleton
from .windows import NormStats

MAGIC = b"IBTW"
VERSION = 1


class ContainerError(ValueError):
    pass


class ChecksumError(ContainerError):
    pass


class VersionError(ContainerError):
    pass


def skeleton_to_dict(skeleton: Skeleton) -> dict:
    d = {
        "parent": skeleton.parent.tolist(),
        "offsets": skeleton.offsets.tolist(),
        "names": list(skeleton.names),
        "mirror_map": skeleton.mirror_map.tolist() if skeleton.mirror_map is not None else None,
        "foot_joints": skeleton.foot_joints.tolist() if skeleton.foot_joints is not None else None,
        "rotation_orders": getattr(skeleton, "rotation_orders", None),
    }
    return d


def skeleton_from_dict(d: dict) -> Skeleton:
    skeleton = Skeleton(
        parent=np.array(d["parent"]),
        offsets=np.array(d["offsets"]),
        names=list(d["names"]),
        mirror_map=np.array(d["mirror_map"]) if d.get("mirror_map") is not None else None,
        foot_joints=np.array(d["foot_joints"]) if d.get("foot_joints") is not None else None,
    )
    if d.get("rotation_orders"):
        skeleton.rotation_orders = list(d["rotation_orders"])
    return skeleton


@dataclass
class WeightsContainer:
    config: GeneratorConfig
    skeleton: Skeleton
    norm_stats: NormStats | None
    blocks: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)
    fingerprint: str = ""

    def block(self, name: str) -> np.ndarray:
        return self.blocks[name]


def serialize(container: WeightsContainer) -> bytes:
    names = list(container.blocks.keys())
    if len(set(names)) != len(names):
        raise ContainerError("duplicate block names")
    index = []
    payload = bytearray()
    for name in names:
        arr = np.ascontiguousarray(container.blocks[name], dtype="<f4")
        index.append({"name": name, "shape": list(arr.shape), "offset": len(payload), "nbytes": arr.nbytes})
        payload.extend(arr.tobytes())
    header = {
        "config": container.config.to_dict(),
        "skeleton": skeleton_to_dict(container.skeleton),
        "norm_stats": container.norm_stats.to_dict() if container.norm_stats else None,
        "blocks": index,
        "meta": container.meta,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    body = MAGIC + struct.pack("<IQ", VERSION, len(header_bytes)) + header_bytes + bytes(payload)
    return body + hashlib.sha256(body).digest()


def deserialize(data: bytes) -> WeightsContainer:
    if len(data) < len(MAGIC) + 12 + 32:
        raise ContainerError("truncated file (shorter than fixed header)")
    if data[:4] != MAGIC:
        raise ContainerError("not a weights container (bad magic)")
    version, header_len = struct.unpack("<IQ", data[4:16])
    if version != VERSION:
        raise VersionError(f"unsupported container version {version} (expected {VERSION})")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumError("checksum mismatch: file corrupted")
    header_end = 16 + header_len
    if header_end > len(body):
        raise ContainerError("truncated file (header extends past end)")
    header = json.loads(body[16:header_end].decode())
    payload = body[header_end:]
    blocks = {}
    for entry in header["blocks"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(payload):
            raise ContainerError(f"truncated file (block {entry['name']} out of range)")
        arr = np.frombuffer(payload, dtype="<f4", count=nbytes // 4, offset=start)
        blocks[entry["name"]] = arr.reshape(entry["shape"]).copy()
    stats = NormStats.from_dict(header["norm_stats"]) if header.get("norm_stats") else None
    return WeightsContainer(
        config=GeneratorConfig.from_dict(header["config"]),
        skeleton=skeleton_from_dict(header["skeleton"]),
        norm_stats=stats,
        blocks=blocks,
        meta=header.get("meta", {}),
        fingerprint=digest.hex(),
    )


def save_weights(path, container: WeightsContainer) -> str:
    """Write the container; returns its fingerprint (payload SHA-256)."""
    data = serialize(container)
    with open(path, "wb") as f:
        f.write(data)
    container.fingerprint = data[-32:].hex()
    return container.fingerprint


def load_weights(path) -> WeightsContainer:
    with open(path, "rb") as f:
        return deserialize(f.read())


# model <-> container ---------------------------------------------------------

def container_from_trainer(state, skeleton: Skeleton, norm_stats: NormStats | None,
                           include_optimizer: bool = False, extra_meta: dict | None = None) -> WeightsContainer:
    blocks = {p.name: p.values for p in state.generator.parameters()}
    meta = {"iteration": state.iteration, "has_critics": state.critics is not None}
    if state.critics is not None:
        long_c, short_c = state.critics
        meta["critic_hidden"] = [
            long_c.net.layers[0].weight.shape[1],
            long_c.net.layers[1].weight.shape[1],
        ]
        for p in long_c.parameters() + short_c.parameters():
            blocks[p.name] = p.values
    if include_optimizer:
        meta["optimizer"] = True
        for prefix, opt in (("opt_gen", state.gen_opt), ("opt_critic", state.critic_opt)):
            if opt is None:
                continue
            sd = opt.state_dict()
            meta[f"{prefix}_steps"] = sd["step_count"]
            for kind in ("m", "v", "vhat"):
                for name, arr in sd[kind].items():
                    blocks[f"{prefix}.{kind}.{name}"] = arr
        meta["rng_data"] = json.dumps(state.data_rng.bit_generator.state)
        meta["rng_noise"] = json.dumps(state.noise_rng.bit_generator.state)
    if extra_meta:
        meta.update(extra_meta)
    return WeightsContainer(state.config, skeleton, norm_stats, blocks, meta)


def _load_params(params, blocks, prefix=""):
    for p in params:
        key = prefix + p.name
        if key not in blocks:
            raise ContainerError(f"missing parameter block {key!r}")
        arr = blocks[key]
        if tuple(arr.shape) != tuple(p.values.shape):
            raise ContainerError(f"block {key!r} has shape {arr.shape}, expected {p.values.shape}")
        p.values[...] = arr.astype(p.values.dtype)


def generator_from_container(container: WeightsContainer):
    """Rebuild a TransitionGenerator with the stored weights."""
    from .model.generator import TransitionGenerator

    gen = TransitionGenerator(container.config, np.random.default_rng(0))
    _load_params(gen.parameters(), container.blocks)
    return gen


def trainer_from_container(container: WeightsContainer, params):
    """Rebuild a full TrainerState (networks + optimizers + RNGs) to resume."""
    from .model.training import init_trainer

    critic_hidden = tuple(container.meta.get("critic_hidden", (512, 256)))
    state = init_trainer(container.config, params, critic_hidden=critic_hidden)
    _load_params(state.generator.parameters(), container.blocks)
    if state.critics is not None and container.meta.get("has_critics"):
        long_c, short_c = state.critics
        _load_params(long_c.parameters() + short_c.parameters(), container.blocks)
    state.iteration = int(container.meta.get("iteration", 0))
    if container.meta.get("optimizer"):
        for prefix, opt in (("opt_gen", state.gen_opt), ("opt_critic", state.critic_opt)):
            if opt is None:
                continue
            sd = {
                "step_count": container.meta.get(f"{prefix}_steps", 0),
                "m": {}, "v": {}, "vhat": {},
            }
            for kind in ("m", "v", "vhat"):
                for name in opt.m:
                    sd[kind][name] = container.blocks[f"{prefix}.{kind}.{name}"].astype(float)
            opt.load_state_dict(sd)
        if "rng_data" in container.meta:
            state.data_rng.bit_generator.state = json.loads(container.meta["rng_data"])
            state.noise_rng.bit_generator.state = json.loads(container.meta["rng_noise"])
    return state
