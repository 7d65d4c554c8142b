// Wire types mirroring the review service's JSON bodies.

export type Vec3 = [number, number, number];

export interface ImageSummary {
  id: string;
  width: number;
  height: number;
  rejected: boolean;
  n_boxes: number;
}

export interface ImageInfo {
  id: string;
  width: number;
  height: number;
  K: number[]; // 3x3 row-major
  rejected: boolean;
}

export interface BoxRecord {
  id: string;
  image_id: string;
  category: string;
  center_cam: Vec3 | null;
  dims: Vec3 | null;
  R: number[] | null; // 3x3 row-major, box-local -> camera
  score: number;
  provenance: 'auto' | 'refined' | 'rejected';
  reason: string | null;
  ignore: boolean;
  rev: number;
}

export interface ImageDetail {
  image: ImageInfo;
  boxes: BoxRecord[];
  points: Vec3[];
}

export interface BoxDelta {
  center?: Vec3;
  dims?: Vec3;
  yaw?: number;
  rev?: number;
}

export interface AuditEntry {
  ts: string;
  action: 'patch' | 'delete' | 'reject';
  target: string;
  detail: Record<string, unknown>;
}

export interface ApiError {
  reason: string;
}
