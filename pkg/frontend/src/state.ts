/** Session state: context frames, editable target keyframe, cached responses.
 *
 * One generate request may be in flight at a time; responses carry the token
 * issued when they were requested, and anything stale (superseded parameters
 * or seed) is dropped. Received frames are frozen and never mutated; the
 * target is only editable between requests.
 */

import { qmul, qnormalize, yawQuat, type Pose, type Quat, type SkeletonDef } from "./math3.js";
import type { ServiceClient } from "./api.js";
import type { TransitionResponse } from "./schema.js";

export type Overlay = "model" | "baseline" | "both";

export interface SessionResponses {
  model: TransitionResponse;
  baseline: TransitionResponse;
  token: number;
}

export function clonePose(pose: Pose): Pose {
  return {
    quaternions: pose.quaternions.map((q) => [...q] as Quat),
    rootPosition: [...pose.rootPosition],
  };
}

export function freezeResponse(response: TransitionResponse): TransitionResponse {
  response.frames.forEach((f) => {
    f.quaternions.forEach((q) => Object.freeze(q));
    Object.freeze(f.quaternions);
    Object.freeze(f.rootPosition);
    Object.freeze(f);
  });
  Object.freeze(response.frames);
  response.contacts.forEach((c) => Object.freeze(c));
  Object.freeze(response.contacts);
  return Object.freeze(response);
}

export class SessionState {
  skeleton: SkeletonDef;
  context: Pose[];
  target: Pose;
  length = 30;
  variation = 0.0;
  seed = 0;
  applyIk = false;
  overlay: Overlay = "model";
  cursor = 0;
  responses: SessionResponses | null = null;
  pending = false;
  lastError: string | null = null;

  private nextToken = 1;
  private inFlight = 0;

  constructor(skeleton: SkeletonDef, context: Pose[], target: Pose) {
    if (context.length < skeleton.tPast) {
      throw new Error(`context must hold at least ${skeleton.tPast} frames`);
    }
    this.skeleton = skeleton;
    this.context = context.map(clonePose);
    this.target = clonePose(target);
  }

  get editable(): boolean {
    return !this.pending;
  }

  setLength(length: number): void {
    if (length < 1) throw new Error("transition length must be >= 1");
    this.length = Math.round(length);
    this.markDirty();
  }

  setVariation(variation: number): void {
    if (variation < 0) throw new Error("variation must be >= 0");
    this.variation = variation;
    this.markDirty();
  }

  /** Drag the target root on the ground plane (world X/Z). */
  dragTarget(dx: number, dz: number): void {
    this.assertEditable();
    this.target.rootPosition[0] += dx;
    this.target.rootPosition[2] += dz;
    this.markDirty();
  }

  /** Rotate the target's facing about the up axis. */
  rotateTargetYaw(angle: number): void {
    this.assertEditable();
    this.target.quaternions[0] = qnormalize(qmul(yawQuat(angle), this.target.quaternions[0]));
    this.markDirty();
  }

  /** Replace the target pose rotations with a stored preset. */
  applyPreset(preset: Pose): void {
    this.assertEditable();
    if (preset.quaternions.length !== this.skeleton.jointCount) {
      throw new Error("preset joint count does not match the skeleton");
    }
    this.target.quaternions = preset.quaternions.map((q) => [...q] as Quat);
    this.markDirty();
  }

  /** New seed, same everything else (the resample button). */
  resample(): number {
    this.seed += 1;
    return this.seed;
  }

  private assertEditable(): void {
    if (!this.editable) throw new Error("target locked while a request is in flight");
  }

  private markDirty(): void {
    // parameter changes invalidate whatever is currently cached
    this.nextToken += 1;
  }

  /** POST /generate and /interpolate; cache both under one token. */
  async requestTransition(client: ServiceClient): Promise<SessionResponses | null> {
    const token = this.nextToken;
    const request = {
      past: this.context.slice(-this.skeleton.tPast).map(clonePose),
      target: clonePose(this.target),
      length: this.length,
      variation: this.variation,
      seed: this.seed,
      applyIk: this.applyIk,
    };
    this.pending = true;
    this.inFlight += 1;
    this.lastError = null;
    try {
      const [model, baseline] = await Promise.all([
        client.generate(request, this.skeleton.jointCount),
        client.interpolate(request, this.skeleton.jointCount),
      ]);
      if (token !== this.nextToken) {
        return null; // superseded while waiting; drop the stale result
      }
      this.responses = {
        model: freezeResponse(model),
        baseline: freezeResponse(baseline),
        token,
      };
      this.cursor = 0;
      return this.responses;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    } finally {
      this.inFlight -= 1;
      this.pending = this.inFlight > 0;
    }
  }
}

/** Harvest pose presets from context frames (first/middle/last). */
export function presetsFromContext(context: Pose[]): Array<{ name: string; pose: Pose }> {
  if (context.length === 0) return [];
  const picks = [
    { name: "context start", index: 0 },
    { name: "context middle", index: Math.floor(context.length / 2) },
    { name: "context end", index: context.length - 1 },
  ];
  const seen = new Set<number>();
  const presets: Array<{ name: string; pose: Pose }> = [];
  for (const { name, index } of picks) {
    if (!seen.has(index)) {
      seen.add(index);
      presets.push({ name, pose: clonePose(context[index]) });
    }
  }
  return presets;
}
