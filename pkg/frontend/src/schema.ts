/** Wire-schema validation for the inference service.
 *
 * Every response is validated before use and every request is built through
 * these encoders, so a drifting service surfaces as a clear error instead of
 * silent NaNs in the viewport.
 */

import type { Pose, Quat, SkeletonDef, Vec3 } from "./math3.js";

export class SchemaError extends Error {
  constructor(public field: string, message: string) {
    super(`${field}: ${message}`);
  }
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function numberArray(value: unknown, length: number, field: string): number[] {
  if (!Array.isArray(value) || value.length !== length || !value.every(isFiniteNumber)) {
    throw new SchemaError(field, `expected ${length} finite numbers`);
  }
  return value as number[];
}

export function decodePose(value: unknown, jointCount: number, field: string): Pose {
  if (typeof value !== "object" || value === null) {
    throw new SchemaError(field, "expected a frame object");
  }
  const frame = value as Record<string, unknown>;
  const quats = frame["quaternions"];
  if (!Array.isArray(quats) || quats.length !== jointCount) {
    throw new SchemaError(`${field}.quaternions`, `expected ${jointCount} quaternions`);
  }
  const quaternions = quats.map(
    (q, i) => numberArray(q, 4, `${field}.quaternions[${i}]`) as Quat,
  );
  const rootPosition = numberArray(frame["root_position"], 3, `${field}.root_position`) as Vec3;
  return { quaternions, rootPosition };
}

export function encodePose(pose: Pose): unknown {
  return {
    quaternions: pose.quaternions.map((q) => [...q]),
    root_position: [...pose.rootPosition],
  };
}

export function decodeSkeleton(value: unknown): SkeletonDef {
  if (typeof value !== "object" || value === null) {
    throw new SchemaError("skeleton", "expected an object");
  }
  const body = value as Record<string, unknown>;
  const jointCount = body["joint_count"];
  if (!isFiniteNumber(jointCount) || jointCount < 1) {
    throw new SchemaError("skeleton.joint_count", "expected a positive integer");
  }
  const names = body["names"];
  if (!Array.isArray(names) || names.length !== jointCount || !names.every((n) => typeof n === "string")) {
    throw new SchemaError("skeleton.names", `expected ${jointCount} strings`);
  }
  const parents = numberArray(body["parents"], jointCount, "skeleton.parents");
  if (parents[0] !== -1) {
    throw new SchemaError("skeleton.parents", "joint 0 must be the root (parent -1)");
  }
  const offsetsRaw = body["offsets"];
  if (!Array.isArray(offsetsRaw) || offsetsRaw.length !== jointCount) {
    throw new SchemaError("skeleton.offsets", `expected ${jointCount} offsets`);
  }
  const offsets = offsetsRaw.map((o, i) => numberArray(o, 3, `skeleton.offsets[${i}]`) as Vec3);
  let footJoints: number[] | null = null;
  if (body["foot_joints"] != null) {
    footJoints = numberArray(body["foot_joints"], 4, "skeleton.foot_joints");
  }
  let tPast = 10;
  if (body["t_past"] != null) {
    if (!isFiniteNumber(body["t_past"]) || (body["t_past"] as number) < 1) {
      throw new SchemaError("skeleton.t_past", "expected a positive integer");
    }
    tPast = body["t_past"] as number;
  }
  return { jointCount, parents, offsets, names: names as string[], footJoints, tPast };
}

export interface TransitionResponse {
  frames: Pose[];
  contacts: number[][];
  appliedYaw: Quat;
  model: string;
}

export function decodeTransitionResponse(
  value: unknown, jointCount: number, expectedFrames: number,
): TransitionResponse {
  if (typeof value !== "object" || value === null) {
    throw new SchemaError("response", "expected an object");
  }
  const body = value as Record<string, unknown>;
  const framesRaw = body["frames"];
  if (!Array.isArray(framesRaw) || framesRaw.length !== expectedFrames) {
    throw new SchemaError("response.frames", `expected exactly ${expectedFrames} frames`);
  }
  const frames = framesRaw.map((f, i) => decodePose(f, jointCount, `response.frames[${i}]`));
  const contactsRaw = body["contacts"];
  if (!Array.isArray(contactsRaw) || contactsRaw.length !== expectedFrames) {
    throw new SchemaError("response.contacts", `expected ${expectedFrames} contact rows`);
  }
  const contacts = contactsRaw.map((row, i) => numberArray(row, 4, `response.contacts[${i}]`));
  const appliedYaw = numberArray(body["applied_yaw"], 4, "response.applied_yaw") as Quat;
  const model = body["model"];
  if (typeof model !== "string") {
    throw new SchemaError("response.model", "expected a string fingerprint");
  }
  return { frames, contacts, appliedYaw, model };
}

export interface TransitionRequest {
  past: Pose[];
  target: Pose;
  length: number;
  variation: number;
  seed: number;
  applyIk: boolean;
}

export function encodeTransitionRequest(req: TransitionRequest): unknown {
  if (req.length < 1) throw new SchemaError("request.length", "must be >= 1");
  if (req.variation < 0) throw new SchemaError("request.variation", "must be >= 0");
  return {
    past: req.past.map(encodePose),
    target: encodePose(req.target),
    length: req.length,
    variation: req.variation,
    seed: req.seed,
    apply_ik: req.applyIk,
  };
}
