/** Minimal 3D math for skeleton playback: vectors, quaternions, forward kinematics.
 *
 * Quaternions are [w, x, y, z] (matching the service wire format), Y is up.
 */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export const QUAT_IDENTITY: Quat = [1, 0, 0, 0];

export function vadd(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function vsub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function vscale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function vlength(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function qmul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function qnormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (n === 0) throw new Error("zero-norm quaternion");
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export function qrotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const [vx, vy, vz] = v;
  const tx = 2 * (y * vz - z * vy);
  const ty = 2 * (z * vx - x * vz);
  const tz = 2 * (x * vy - y * vx);
  return [
    vx + w * tx + y * tz - z * ty,
    vy + w * ty + z * tx - x * tz,
    vz + w * tz + x * ty - y * tx,
  ];
}

export function yawQuat(angle: number): Quat {
  return [Math.cos(angle / 2), 0, Math.sin(angle / 2), 0];
}

export interface SkeletonDef {
  jointCount: number;
  parents: number[];
  offsets: Vec3[];
  names: string[];
  footJoints: number[] | null;
  tPast: number;
}

export interface Pose {
  quaternions: Quat[];
  rootPosition: Vec3;
}

/** Global joint positions via forward kinematics. */
export function fkPositions(skeleton: SkeletonDef, pose: Pose): Vec3[] {
  const positions: Vec3[] = new Array(skeleton.jointCount);
  const rotations: Quat[] = new Array(skeleton.jointCount);
  positions[0] = [...pose.rootPosition] as Vec3;
  rotations[0] = pose.quaternions[0];
  for (let k = 1; k < skeleton.jointCount; k++) {
    const parent = skeleton.parents[k];
    positions[k] = vadd(positions[parent], qrotate(rotations[parent], skeleton.offsets[k]));
    rotations[k] = qmul(rotations[parent], pose.quaternions[k]);
  }
  return positions;
}

/** Rest pose: identity rotations, root at its offset. */
export function restPose(skeleton: SkeletonDef): Pose {
  return {
    quaternions: skeleton.offsets.map(() => [...QUAT_IDENTITY] as Quat),
    rootPosition: [...skeleton.offsets[0]] as Vec3,
  };
}

/** Bone segments (parent position, joint position) for rendering. */
export function boneSegments(skeleton: SkeletonDef, pose: Pose): Array<[Vec3, Vec3]> {
  const p = fkPositions(skeleton, pose);
  const segments: Array<[Vec3, Vec3]> = [];
  for (let k = 1; k < skeleton.jointCount; k++) {
    segments.push([p[skeleton.parents[k]], p[k]]);
  }
  return segments;
}
