/** Frame-accurate playback over cached responses, with overlay and ghosts. */

import type { Pose, SkeletonDef } from "./math3.js";
import type { SessionResponses } from "./state.js";
import type { Overlay } from "./state.js";
import {
  COLORS,
  contactMarkers,
  gridStrokes,
  skeletonStrokes,
  type Camera,
  type Scene,
} from "./viewport.js";

export interface PlaybackInput {
  skeleton: SkeletonDef;
  context: Pose[];
  target: Pose;
  responses: SessionResponses | null;
  overlay: Overlay;
  cursor: number;   // frame index into the generated transition
}

export function frameCount(responses: SessionResponses | null): number {
  return responses ? responses.model.frames.length : 0;
}

export function clampCursor(cursor: number, responses: SessionResponses | null): number {
  const n = frameCount(responses);
  if (n === 0) return 0;
  return Math.max(0, Math.min(n - 1, Math.round(cursor)));
}

/** Build the full scene for one playback position. */
export function buildScene(cam: Camera, input: PlaybackInput): Scene {
  const scene: Scene = { strokes: gridStrokes(cam), markers: [] };
  const { skeleton } = input;
  // ghosts: last context frame and the target keyframe
  const lastContext = input.context[input.context.length - 1];
  scene.strokes.push(...skeletonStrokes(cam, skeleton, lastContext, COLORS.ghost, 1));
  scene.strokes.push(...skeletonStrokes(cam, skeleton, input.target, COLORS.target, 2));
  if (!input.responses) return scene;

  const cursor = clampCursor(input.cursor, input.responses);
  if (input.overlay === "model" || input.overlay === "both") {
    const pose = input.responses.model.frames[cursor];
    scene.strokes.push(...skeletonStrokes(cam, skeleton, pose, COLORS.model, 3));
    scene.markers.push(...contactMarkers(cam, skeleton, pose, input.responses.model.contacts[cursor]));
  }
  if (input.overlay === "baseline" || input.overlay === "both") {
    const pose = input.responses.baseline.frames[cursor];
    scene.strokes.push(...skeletonStrokes(cam, skeleton, pose, COLORS.baseline, 2));
  }
  return scene;
}

export class PlaybackClock {
  playing = false;
  private accumulator = 0;

  constructor(public fps = 30) {}

  /** Advance the cursor by elapsed wall time; returns the new cursor. */
  tick(cursor: number, total: number, dtSeconds: number): number {
    if (!this.playing || total === 0) return cursor;
    this.accumulator += dtSeconds * this.fps;
    const steps = Math.floor(this.accumulator);
    this.accumulator -= steps;
    return (cursor + steps) % total;
  }
}
