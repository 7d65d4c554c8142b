// Box geometry helpers shared by the 3D overlay and the projection panels.
// Corner sign order matches the backend: (---, +--, ++-, -+-, --+, +-+, +++, -++).

import type { BoxRecord, Vec3 } from './types';

export const CORNER_SIGNS: Vec3[] = [
  [-1, -1, -1],
  [+1, -1, -1],
  [+1, +1, -1],
  [-1, +1, -1],
  [-1, -1, +1],
  [+1, -1, +1],
  [+1, +1, +1],
  [-1, +1, +1],
];

// corner-index pairs forming the 12 box edges
export const BOX_EDGES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [3, 0],
  [4, 5], [5, 6], [6, 7], [7, 4],
  [0, 4], [1, 5], [2, 6], [3, 7],
];

export function matVec(R: number[], v: Vec3): Vec3 {
  return [
    R[0] * v[0] + R[1] * v[1] + R[2] * v[2],
    R[3] * v[0] + R[4] * v[1] + R[5] * v[2],
    R[6] * v[0] + R[7] * v[1] + R[8] * v[2],
  ];
}

export function matTVec(R: number[], v: Vec3): Vec3 {
  return [
    R[0] * v[0] + R[3] * v[1] + R[6] * v[2],
    R[1] * v[0] + R[4] * v[1] + R[7] * v[2],
    R[2] * v[0] + R[5] * v[1] + R[8] * v[2],
  ];
}

export function matMul(A: number[], B: number[]): number[] {
  const out = new Array<number>(9).fill(0);
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      for (let k = 0; k < 3; k++) {
        out[3 * i + j] += A[3 * i + k] * B[3 * k + j];
      }
    }
  }
  return out;
}

/** Rodrigues rotation about a unit axis. */
export function axisAngle(axis: Vec3, angle: number): number[] {
  const [x, y, z] = axis;
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  const t = 1 - c;
  return [
    t * x * x + c, t * x * y - s * z, t * x * z + s * y,
    t * x * y + s * z, t * y * y + c, t * y * z - s * x,
    t * x * z - s * y, t * y * z + s * x, t * z * z + c,
  ];
}

export function boxCorners(center: Vec3, dims: Vec3, R: number[]): Vec3[] {
  return CORNER_SIGNS.map((sign) => {
    const local: Vec3 = [
      (sign[0] * dims[0]) / 2,
      (sign[1] * dims[1]) / 2,
      (sign[2] * dims[2]) / 2,
    ];
    const rotated = matVec(R, local);
    return [rotated[0] + center[0], rotated[1] + center[1], rotated[2] + center[2]];
  });
}

/** Apply an edit delta to a box record, mirroring the server's PATCH rules. */
export function applyDelta(
  box: BoxRecord,
  delta: { center?: Vec3; dims?: Vec3; yaw?: number },
): BoxRecord {
  if (!box.center_cam || !box.dims || !box.R) return box;
  let center = box.center_cam;
  let dims = box.dims;
  let R = box.R;
  if (delta.center) {
    center = [center[0] + delta.center[0], center[1] + delta.center[1], center[2] + delta.center[2]];
  }
  if (delta.dims) {
    dims = [dims[0] + delta.dims[0], dims[1] + delta.dims[1], dims[2] + delta.dims[2]];
  }
  if (delta.yaw !== undefined && delta.yaw !== 0) {
    const up: Vec3 = [R[1], R[4], R[7]]; // y column: the box's vertical axis
    R = matMul(axisAngle(up, delta.yaw), R);
  }
  return { ...box, center_cam: center, dims, R };
}

/**
 * Project camera-frame points into the box's local frame and take the
 * 2D slice for one orthographic panel.
 *
 * Panels drop one local axis each: 'top' looks along -y (shows x/z),
 * 'front' looks along -z (shows x/y), 'side' looks along -x (shows z/y).
 */
export type PanelKind = 'top' | 'front' | 'side';

const PANEL_AXES: Record<PanelKind, [number, number]> = {
  top: [0, 2],
  front: [0, 1],
  side: [2, 1],
};

export function projectToPanel(
  points: Vec3[],
  box: { center_cam: Vec3; dims: Vec3; R: number[] },
  panel: PanelKind,
): { xy: [number, number][]; halfExtent: [number, number] } {
  const [ai, bi] = PANEL_AXES[panel];
  const xy = points.map((p) => {
    const rel: Vec3 = [
      p[0] - box.center_cam[0],
      p[1] - box.center_cam[1],
      p[2] - box.center_cam[2],
    ];
    const local = matTVec(box.R, rel);
    return [local[ai], local[bi]] as [number, number];
  });
  return { xy, halfExtent: [box.dims[ai] / 2, box.dims[bi] / 2] };
}

/** Axis labels for a panel, naming the box-local axes it spans. */
export function panelAxisLabels(panel: PanelKind): [string, string] {
  const names = ['x', 'y', 'z'] as const;
  const [ai, bi] = PANEL_AXES[panel];
  return [names[ai], names[bi]];
}
