"""HTTP inference service for the studio UI and other clients.

Endpoints:
  GET  /health       -> {"status", "model", "version"}
  GET  /skeleton     -> hierarchy, offsets, names, foot joints
  POST /generate     -> transition frames from the loaded model
  POST /interpolate  -> interpolation-baseline frames for overlay

Wire format: quaternions are [w, x, y, z] arrays, positions [x, y, z] in
skeleton units. A frame is {"quaternions": [[w,x,y,z] * j], "root_position":
[x,y,z]}. Requests: {"past": [frame * 10], "target": frame, "length": int,
"variation": float >= 0, "seed": int, "apply_ik": bool}. Responses:
{"frames": [frame * L], "contacts": [[4 floats] * L], "applied_yaw":
[w,x,y,z], "model": fingerprint}; inference wall time is returned in the
X-Inference-Ms header so identical requests yield byte-identical bodies.

Schema violations are rejected with 400 and field-level messages; semantic
violations (length < 1, wrong past frame count, joint-count mismatch) with
422. The service is stateless across requests: per-request RNG is derived
from the request seed, so interleaved clients get independent results.
"""
from __future__ import annotations

import json
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import quat
from .__init__ import __version__
from .baselines import interpolate_baseline
from .ik import apply_contact_ik
from .motionops import CONTACT_SPEED_THRESHOLD, canonicalize_frames, extract_contacts, rotate_frames
from .skeleton import FrameState, MotionClip
from .weightsio import WeightsContainer, generator_from_container


class FramePayload(BaseModel):
    quaternions: list[list[float]]
    root_position: list[float] = Field(min_length=3, max_length=3)


class TransitionRequest(BaseModel):
    past: list[FramePayload]
    target: FramePayload
    length: int
    variation: float = Field(default=0.0, ge=0.0)
    seed: int = 0
    apply_ik: bool = False


class SemanticError(Exception):
    def __init__(self, message):
        self.message = message


def _frame_from_payload(payload: FramePayload, joint_count: int) -> FrameState:
    q = np.asarray(payload.quaternions, dtype=float)
    if q.shape != (joint_count, 4):
        raise SemanticError(
            f"frame quaternion block has shape {list(q.shape)}, expected [{joint_count}, 4]"
        )
    return FrameState(q=q, root=np.asarray(payload.root_position, dtype=float))


def _frame_to_payload(frame: FrameState) -> dict:
    return {
        "quaternions": [[float(v) for v in row] for row in frame.q],
        "root_position": [float(v) for v in frame.root],
    }


def _deterministic_json(body: dict) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()


def create_app(container: WeightsContainer) -> FastAPI:
    app = FastAPI(title="inbetween inference service", version=__version__)
    # the studio UI is served from its own origin; this is a local tool
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"], expose_headers=["X-Inference-Ms"],
    )
    skeleton = container.skeleton
    config = container.config
    generator = generator_from_container(container)
    t_past = config.t_past
    contact_threshold = float(container.meta.get("contact_threshold", CONTACT_SPEED_THRESHOLD))

    @app.exception_handler(RequestValidationError)
    async def schema_error(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(loc) for loc in e["loc"]), "message": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": "schema violation", "errors": errors})

    @app.exception_handler(SemanticError)
    async def semantic_error(request: Request, exc: SemanticError):
        return JSONResponse(status_code=422, content={"detail": exc.message})

    @app.get("/health")
    def health():
        return {"status": "ok", "model": container.fingerprint, "version": __version__}

    @app.get("/skeleton")
    def skeleton_info():
        return {
            "joint_count": skeleton.joint_count,
            "names": list(skeleton.names),
            "parents": skeleton.parent.tolist(),
            "offsets": skeleton.offsets.tolist(),
            "foot_joints": skeleton.foot_joints.tolist() if skeleton.foot_joints is not None else None,
            "t_past": t_past,
            "units": "skeleton",
        }

    def _validate(req: TransitionRequest):
        if req.length < 1:
            raise SemanticError("length must be >= 1")
        if len(req.past) != t_past:
            raise SemanticError(f"expected exactly {t_past} past frames, got {len(req.past)}")
        past = [_frame_from_payload(p, skeleton.joint_count) for p in req.past]
        target = _frame_from_payload(req.target, skeleton.joint_count)
        return past, target

    @app.post("/generate")
    def generate(req: TransitionRequest):
        started = time.perf_counter()
        past, target = _validate(req)
        frames, contacts, applied_yaw = generate_transition(
            generator, skeleton, past, target, req.length,
            variation=req.variation, seed=req.seed, apply_ik=req.apply_ik,
            contact_threshold=contact_threshold,
        )
        body = {
            "frames": [_frame_to_payload(f) for f in frames],
            "contacts": [[float(v) for v in row] for row in contacts],
            "applied_yaw": [float(v) for v in applied_yaw],
            "model": container.fingerprint,
        }
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return Response(
            content=_deterministic_json(body),
            media_type="application/json",
            headers={"X-Inference-Ms": f"{elapsed_ms:.1f}"},
        )

    @app.post("/interpolate")
    def interpolate(req: TransitionRequest):
        started = time.perf_counter()
        past, target = _validate(req)
        frames = interpolate_baseline(past[-1], target, req.length)
        body = {
            "frames": [_frame_to_payload(f) for f in frames],
            "contacts": [[float(v) for v in f.contacts] for f in frames],
            "applied_yaw": [1.0, 0.0, 0.0, 0.0],
            "model": container.fingerprint,
        }
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return Response(
            content=_deterministic_json(body),
            media_type="application/json",
            headers={"X-Inference-Ms": f"{elapsed_ms:.1f}"},
        )

    return app


def generate_transition(generator, skeleton, past, target, length,
                        variation=0.0, seed=0, apply_ik=False,
                        contact_threshold=CONTACT_SPEED_THRESHOLD):
    """Canonicalize, roll out, rotate back; optional contact-driven foot IK.

    Returns (frames in the caller's space, contact probabilities (L, 4),
    applied_yaw). Deterministic for variation 0; otherwise the per-sequence
    target noise is drawn from a generator seeded with `seed`. Context
    contact flags are derived from foot velocities (callers rarely have
    them), matching how the model saw its training inputs.
    """
    from .model.generator import rollout_frames

    sequence = [f.copy() for f in past] + [target.copy()]
    if generator.config.include_contacts and skeleton.foot_joints is not None:
        flags = extract_contacts(MotionClip(skeleton, sequence), contact_threshold)
        for f, c in zip(sequence, flags):
            f.contacts = c
    canonical, applied_yaw = canonicalize_frames(sequence, len(past) - 1)
    z = None
    sigma = variation * generator.config.sigma_target
    if sigma > 0.0:
        rng = np.random.default_rng(seed)
        z = rng.normal(0.0, sigma, size=(1, generator.config.z_target_dim))
    frames, contacts = rollout_frames(
        generator, skeleton, canonical[:-1], canonical[-1], length, z_target=z
    )
    frames = rotate_frames(frames, quat.conjugate(applied_yaw))
    if apply_ik and skeleton.foot_joints is not None:
        frames = apply_contact_ik(skeleton, frames, contacts)
    return frames, contacts, applied_yaw
