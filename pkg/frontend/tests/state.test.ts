import { describe, expect, it } from "vitest";

import type { ServiceClient } from "../src/api.js";
import { QUAT_IDENTITY, qrotate, restPose, type Pose, type SkeletonDef } from "../src/math3.js";
import type { TransitionRequest, TransitionResponse } from "../src/schema.js";
import { SessionState, clonePose, presetsFromContext } from "../src/state.js";

const SKELETON: SkeletonDef = {
  jointCount: 2,
  parents: [-1, 0],
  offsets: [
    [0, 1, 0],
    [0, -0.5, 0],
  ],
  names: ["root", "tip"],
  footJoints: null,
  tPast: 10,
};

function makeContext(frames = 10): Pose[] {
  const out: Pose[] = [];
  for (let t = 0; t < frames; t++) {
    const pose = restPose(SKELETON);
    pose.rootPosition = [0.05 * t, 1, 0];
    out.push(pose);
  }
  return out;
}

function fakeResponse(req: TransitionRequest, tag: number): TransitionResponse {
  const frames: Pose[] = [];
  for (let k = 0; k < req.length; k++) {
    const pose = clonePose(req.target);
    pose.rootPosition = [tag + k * 0.01, 1, 0];
    frames.push(pose);
  }
  return {
    frames,
    contacts: frames.map(() => [0, 0, 0, 0]),
    appliedYaw: [...QUAT_IDENTITY],
    model: "fake",
  };
}

class FakeClient {
  calls: Array<{ path: string; req: TransitionRequest }> = [];
  delay: Promise<void> = Promise.resolve();

  async generate(req: TransitionRequest): Promise<TransitionResponse> {
    this.calls.push({ path: "/generate", req });
    await this.delay;
    return fakeResponse(req, req.seed);
  }

  async interpolate(req: TransitionRequest): Promise<TransitionResponse> {
    this.calls.push({ path: "/interpolate", req });
    await this.delay;
    return fakeResponse(req, 1000 + req.seed);
  }
}

function makeSession(): SessionState {
  const context = makeContext();
  const target = clonePose(context[context.length - 1]);
  target.rootPosition = [1.5, 1, 0];
  return new SessionState(SKELETON, context, target);
}

describe("target editing", () => {
  it("drag moves the root on the ground plane", () => {
    const s = makeSession();
    const before = [...s.target.rootPosition];
    s.dragTarget(2, -0.5);
    expect(s.target.rootPosition[0]).toBeCloseTo(before[0] + 2);
    expect(s.target.rootPosition[1]).toBe(before[1]);
    expect(s.target.rootPosition[2]).toBeCloseTo(before[2] - 0.5);
  });

  it("yaw premultiplies the root quaternion", () => {
    const s = makeSession();
    s.rotateTargetYaw(Math.PI / 2);
    const forward = qrotate(s.target.quaternions[0], [0, 0, 1]);
    // identity faced +Z; after +90 deg yaw the facing lands on +X
    expect(forward[0]).toBeCloseTo(1, 10);
    expect(forward[2]).toBeCloseTo(0, 10);
  });

  it("preset replaces target rotations", () => {
    const s = makeSession();
    const preset = restPose(SKELETON);
    preset.quaternions[1] = [0.707106781, 0.707106781, 0, 0];
    s.applyPreset(preset);
    expect(s.target.quaternions[1][1]).toBeCloseTo(0.707106781);
  });

  it("presets are harvested from context frames", () => {
    const presets = presetsFromContext(makeContext());
    expect(presets.map((p) => p.name)).toEqual(["context start", "context middle", "context end"]);
  });
});

describe("request lifecycle", () => {
  it("caches both model and baseline responses", async () => {
    const s = makeSession();
    const client = new FakeClient();
    const out = await s.requestTransition(client as unknown as ServiceClient);
    expect(out).not.toBeNull();
    expect(s.responses?.model.frames).toHaveLength(s.length);
    expect(s.responses?.baseline.frames).toHaveLength(s.length);
    expect(client.calls.map((c) => c.path).sort()).toEqual(["/generate", "/interpolate"]);
  });

  it("resample changes only the seed", async () => {
    const s = makeSession();
    const client = new FakeClient();
    await s.requestTransition(client as unknown as ServiceClient);
    const before = client.calls[0].req;
    s.resample();
    await s.requestTransition(client as unknown as ServiceClient);
    const after = client.calls[2].req;
    expect(after.seed).toBe(before.seed + 1);
    expect(after.length).toBe(before.length);
    expect(after.variation).toBe(before.variation);
    expect(after.target).toEqual(before.target);
  });

  it("locks the target while a request is in flight", async () => {
    const s = makeSession();
    const client = new FakeClient();
    let release!: () => void;
    client.delay = new Promise((resolve) => (release = resolve));
    const pending = s.requestTransition(client as unknown as ServiceClient);
    expect(s.editable).toBe(false);
    expect(() => s.dragTarget(1, 0)).toThrow(/in flight/);
    release();
    await pending;
    expect(s.editable).toBe(true);
  });

  it("drops stale responses when parameters change mid-flight", async () => {
    const s = makeSession();
    const client = new FakeClient();
    let release!: () => void;
    client.delay = new Promise((resolve) => (release = resolve));
    const pending = s.requestTransition(client as unknown as ServiceClient);
    // cannot edit the target mid-flight, but sliders may move: that
    // invalidates the token
    release();
    s.setLength(12);
    const out = await pending;
    expect(out).toBeNull();
    expect(s.responses).toBeNull();
  });

  it("never mutates received frames (responses are frozen)", async () => {
    const s = makeSession();
    const client = new FakeClient();
    await s.requestTransition(client as unknown as ServiceClient);
    const frame = s.responses!.model.frames[0];
    expect(Object.isFrozen(frame)).toBe(true);
    expect(Object.isFrozen(frame.quaternions[0])).toBe(true);
    expect(() => {
      (frame.rootPosition as number[])[0] = 99;
    }).toThrow();
  });

  it("surfaces service errors inline", async () => {
    const s = makeSession();
    const failing = {
      generate: async () => {
        throw new Error("422: length must be >= 1");
      },
      interpolate: async () => fakeResponse({ ...({} as TransitionRequest), length: 1, seed: 0, variation: 0, applyIk: false, past: [], target: restPose(SKELETON) }, 0),
    };
    await expect(s.requestTransition(failing as unknown as ServiceClient)).rejects.toThrow();
    expect(s.lastError).toContain("422");
    expect(s.editable).toBe(true);
  });

  it("rejects invalid length and variation", () => {
    const s = makeSession();
    expect(() => s.setLength(0)).toThrow(/>= 1/);
    expect(() => s.setVariation(-0.1)).toThrow(/>= 0/);
  });
});
