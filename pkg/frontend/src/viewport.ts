/** Orbit-camera viewport rendering skeletons as line segments on a canvas.
 *
 * Y-up world, perspective projection, ground grid in skeleton units. The
 * geometry pipeline (camera, projection, segment building) is pure so it can
 * run headlessly; only draw() touches the canvas.
 */

import { boneSegments, fkPositions, vsub, type Pose, type SkeletonDef, type Vec3 } from "./math3.js";

export interface Camera {
  yaw: number;
  pitch: number;
  distance: number;
  center: Vec3;
}

export function defaultCamera(): Camera {
  return { yaw: 0.8, pitch: 0.45, distance: 6, center: [0, 1, 0] };
}

export function cameraPosition(cam: Camera): Vec3 {
  const cp = Math.cos(cam.pitch);
  return [
    cam.center[0] + cam.distance * cp * Math.cos(cam.yaw),
    cam.center[1] + cam.distance * Math.sin(cam.pitch),
    cam.center[2] + cam.distance * cp * Math.sin(cam.yaw),
  ];
}

/** World point -> normalized screen coordinates (origin center, y up). */
export function project(cam: Camera, point: Vec3): [number, number] | null {
  const eye = cameraPosition(cam);
  const forward = vsub(cam.center, eye);
  const flen = Math.hypot(...forward);
  const f: Vec3 = [forward[0] / flen, forward[1] / flen, forward[2] / flen];
  // right = normalize(f x up), up' = right x f
  const rx = f[2] * 1 - 0, rz = -f[0];
  const rlen = Math.hypot(rx, rz) || 1;
  const right: Vec3 = [rx / rlen, 0, rz / rlen];
  const up: Vec3 = [
    right[1] * f[2] - right[2] * f[1],
    right[2] * f[0] - right[0] * f[2],
    right[0] * f[1] - right[1] * f[0],
  ];
  const rel = vsub(point, eye);
  const depth = rel[0] * f[0] + rel[1] * f[1] + rel[2] * f[2];
  if (depth <= 0.05) return null; // behind the camera
  const fov = 1.2;
  const x = (rel[0] * right[0] + rel[1] * right[1] + rel[2] * right[2]) / (depth * Math.tan(fov / 2));
  const y = (rel[0] * up[0] + rel[1] * up[1] + rel[2] * up[2]) / (depth * Math.tan(fov / 2));
  return [x, -y];
}

export interface Stroke {
  from: [number, number];
  to: [number, number];
  color: string;
  width: number;
}

export interface Marker {
  at: [number, number];
  color: string;
  radius: number;
}

export interface Scene {
  strokes: Stroke[];
  markers: Marker[];
}

export const COLORS = {
  grid: "#2c3340",
  gridAxis: "#3f4a5f",
  model: "#5ec8f8",
  baseline: "#f2a65a",
  context: "#8a93a6",
  target: "#7ef29a",
  ghost: "#4a5264",
  contact: "#ff6b81",
};

export function gridStrokes(cam: Camera, extent = 6, step = 1): Stroke[] {
  const strokes: Stroke[] = [];
  for (let i = -extent; i <= extent; i += step) {
    const lines: Array<[Vec3, Vec3, string]> = [
      [[i, 0, -extent], [i, 0, extent], i === 0 ? COLORS.gridAxis : COLORS.grid],
      [[-extent, 0, i], [extent, 0, i], i === 0 ? COLORS.gridAxis : COLORS.grid],
    ];
    for (const [a, b, color] of lines) {
      const pa = project(cam, a);
      const pb = project(cam, b);
      if (pa && pb) strokes.push({ from: pa, to: pb, color, width: 1 });
    }
  }
  return strokes;
}

export function skeletonStrokes(
  cam: Camera, skeleton: SkeletonDef, pose: Pose, color: string, width = 2,
): Stroke[] {
  const strokes: Stroke[] = [];
  for (const [a, b] of boneSegments(skeleton, pose)) {
    const pa = project(cam, a);
    const pb = project(cam, b);
    if (pa && pb) strokes.push({ from: pa, to: pb, color, width });
  }
  return strokes;
}

/** Contact markers under feet whose predicted probability exceeds 0.5. */
export function contactMarkers(
  cam: Camera, skeleton: SkeletonDef, pose: Pose, contacts: number[],
): Marker[] {
  if (!skeleton.footJoints) return [];
  const positions = fkPositions(skeleton, pose);
  const markers: Marker[] = [];
  skeleton.footJoints.forEach((joint, slot) => {
    if (contacts[slot] > 0.5) {
      const p = positions[joint];
      const at = project(cam, [p[0], 0, p[2]]);
      if (at) markers.push({ at, color: COLORS.contact, radius: 4 });
    }
  });
  return markers;
}

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#171b22";
  ctx.fillRect(0, 0, w, h);
  const scale = Math.min(w, h) / 2;
  const toPx = (p: [number, number]): [number, number] => [w / 2 + p[0] * scale, h / 2 + p[1] * scale];
  for (const s of scene.strokes) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width;
    ctx.beginPath();
    ctx.moveTo(...toPx(s.from));
    ctx.lineTo(...toPx(s.to));
    ctx.stroke();
  }
  for (const m of scene.markers) {
    ctx.fillStyle = m.color;
    const [x, y] = toPx(m.at);
    ctx.beginPath();
    ctx.arc(x, y, m.radius, 0, Math.PI * 2);
    ctx.fill();
  }
}
