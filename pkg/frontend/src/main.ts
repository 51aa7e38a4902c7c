/** DOM wiring for the keyframe studio. */

import { ServiceClient, ServiceError } from "./api.js";
import { restPose, vadd, type Pose, type SkeletonDef, type Vec3 } from "./math3.js";
import { PlaybackClock, buildScene, clampCursor, frameCount } from "./playback.js";
import { SessionState, clonePose, presetsFromContext } from "./state.js";
import { Camera, cameraPosition, defaultCamera, drawScene } from "./viewport.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serviceBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  return fromQuery ?? "http://127.0.0.1:8303";
}

/** Built-in example context: rest pose advancing at constant velocity. */
function exampleContext(skeleton: SkeletonDef, step = 0.02): Pose[] {
  const rest = restPose(skeleton);
  const out: Pose[] = [];
  for (let t = 0; t < skeleton.tPast; t++) {
    const pose = clonePose(rest);
    pose.rootPosition = vadd(pose.rootPosition, [step * t, 0, 0]);
    out.push(pose);
  }
  return out;
}

function initialTarget(context: Pose[]): Pose {
  const target = clonePose(context[context.length - 1]);
  target.rootPosition = vadd(target.rootPosition, [1.0, 0, 0]);
  return target;
}

/** Mouse ray intersected with the ground plane (y = 0). */
function groundHit(cam: Camera, canvas: HTMLCanvasElement, ev: MouseEvent): Vec3 | null {
  const rect = canvas.getBoundingClientRect();
  const scale = Math.min(rect.width, rect.height) / 2;
  const sx = (ev.clientX - rect.left - rect.width / 2) / scale;
  const sy = (ev.clientY - rect.top - rect.height / 2) / scale;
  const eye = cameraPosition(cam);
  const forward: Vec3 = [
    cam.center[0] - eye[0], cam.center[1] - eye[1], cam.center[2] - eye[2],
  ];
  const flen = Math.hypot(...forward);
  const f: Vec3 = [forward[0] / flen, forward[1] / flen, forward[2] / flen];
  const rlen = Math.hypot(f[2], f[0]) || 1;
  const right: Vec3 = [f[2] / rlen, 0, -f[0] / rlen];
  const up: Vec3 = [
    right[1] * f[2] - right[2] * f[1],
    right[2] * f[0] - right[0] * f[2],
    right[0] * f[1] - right[1] * f[0],
  ];
  const tanHalf = Math.tan(1.2 / 2);
  const dir: Vec3 = [
    f[0] + tanHalf * (sx * right[0] - sy * up[0]),
    f[1] + tanHalf * (sx * right[1] - sy * up[1]),
    f[2] + tanHalf * (sx * right[2] - sy * up[2]),
  ];
  if (Math.abs(dir[1]) < 1e-9) return null;
  const t = -eye[1] / dir[1];
  if (t <= 0) return null;
  return [eye[0] + t * dir[0], 0, eye[2] + t * dir[2]];
}

async function boot(): Promise<void> {
  const banner = el<HTMLDivElement>("banner");
  const canvas = el<HTMLCanvasElement>("viewport");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const client = new ServiceClient(serviceBaseUrl());

  let skeleton: SkeletonDef;
  try {
    const health = await client.health();
    skeleton = await client.skeleton();
    el<HTMLSpanElement>("status").textContent =
      `model ${health.model.slice(0, 12)}… · ${skeleton.jointCount} joints`;
    banner.hidden = true;
  } catch (err) {
    banner.hidden = false;
    banner.textContent = `cannot reach service at ${client.baseUrl}: ${
      err instanceof Error ? err.message : err
    }`;
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.onclick = () => {
      banner.hidden = true;
      void boot();
    };
    banner.append(" ", retry);
    return;
  }

  const context = exampleContext(skeleton);
  const session = new SessionState(skeleton, context, initialTarget(context));
  const cam = defaultCamera();
  const clock = new PlaybackClock(30);

  const lengthInput = el<HTMLInputElement>("length");
  const lengthLabel = el<HTMLSpanElement>("length-label");
  const variationInput = el<HTMLInputElement>("variation");
  const variationLabel = el<HTMLSpanElement>("variation-label");
  const seedLabel = el<HTMLSpanElement>("seed-label");
  const overlaySelect = el<HTMLSelectElement>("overlay");
  const timeline = el<HTMLInputElement>("timeline");
  const playButton = el<HTMLButtonElement>("play");
  const presetSelect = el<HTMLSelectElement>("preset");
  const errorLine = el<HTMLDivElement>("error");

  for (const { name } of presetsFromContext(session.context)) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    presetSelect.append(option);
  }

  function syncControls(): void {
    lengthLabel.textContent = String(session.length);
    variationLabel.textContent = session.variation.toFixed(2);
    seedLabel.textContent = String(session.seed);
    timeline.max = String(Math.max(frameCount(session.responses) - 1, 0));
    timeline.value = String(session.cursor);
    playButton.textContent = clock.playing ? "pause" : "play";
  }

  async function requestTransition(): Promise<void> {
    errorLine.textContent = "generating…";
    try {
      await session.requestTransition(client);
      errorLine.textContent = "";
      clock.playing = true;
    } catch (err) {
      errorLine.textContent = err instanceof ServiceError
        ? `service error ${err.status}: ${err.message}`
        : String(err);
    }
    syncControls();
  }

  lengthInput.value = String(session.length);
  lengthInput.oninput = () => {
    session.setLength(Number(lengthInput.value));
    syncControls();
  };
  variationInput.value = String(session.variation);
  variationInput.oninput = () => {
    session.setVariation(Number(variationInput.value));
    syncControls();
  };
  el<HTMLButtonElement>("generate").onclick = () => void requestTransition();
  el<HTMLButtonElement>("resample").onclick = () => {
    session.resample();
    void requestTransition();
  };
  el<HTMLButtonElement>("yaw-left").onclick = () => session.rotateTargetYaw(Math.PI / 12);
  el<HTMLButtonElement>("yaw-right").onclick = () => session.rotateTargetYaw(-Math.PI / 12);
  el<HTMLInputElement>("apply-ik").onchange = (ev) => {
    session.applyIk = (ev.target as HTMLInputElement).checked;
  };
  overlaySelect.onchange = () => {
    session.overlay = overlaySelect.value as typeof session.overlay;
  };
  presetSelect.onchange = () => {
    const preset = presetsFromContext(session.context).find((p) => p.name === presetSelect.value);
    if (preset) session.applyPreset(preset.pose);
  };
  timeline.oninput = () => {
    clock.playing = false;
    session.cursor = clampCursor(Number(timeline.value), session.responses);
    syncControls();
  };
  playButton.onclick = () => {
    clock.playing = !clock.playing;
    syncControls();
  };

  let orbiting = false;
  let draggingTarget = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("mousedown", (ev) => {
    if (ev.button === 2 || ev.shiftKey) {
      draggingTarget = session.editable;
    } else {
      orbiting = true;
    }
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
  window.addEventListener("mouseup", () => {
    orbiting = false;
    draggingTarget = false;
  });
  window.addEventListener("mousemove", (ev) => {
    if (orbiting) {
      cam.yaw += (ev.clientX - lastX) * 0.01;
      cam.pitch = Math.max(0.05, Math.min(1.4, cam.pitch + (ev.clientY - lastY) * 0.01));
    } else if (draggingTarget && session.editable) {
      const hit = groundHit(cam, canvas, ev);
      if (hit) {
        session.target.rootPosition[0] = hit[0];
        session.target.rootPosition[2] = hit[2];
      }
    }
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    cam.distance = Math.max(1.5, Math.min(25, cam.distance * (1 + ev.deltaY * 0.001)));
  });

  let lastTime = performance.now();
  function tick(now: number): void {
    const dt = (now - lastTime) / 1000;
    lastTime = now;
    const total = frameCount(session.responses);
    const next = clock.tick(session.cursor, total, dt);
    if (next !== session.cursor) {
      session.cursor = next;
      timeline.value = String(next);
    }
    const scene = buildScene(cam, {
      skeleton,
      context: session.context,
      target: session.target,
      responses: session.responses,
      overlay: session.overlay,
      cursor: session.cursor,
    });
    drawScene(ctx!, scene, canvas.width, canvas.height);
    requestAnimationFrame(tick);
  }
  syncControls();
  requestAnimationFrame(tick);
}

void boot();
