"""Exact oriented 3D box IoU and its Monte-Carlo verification oracle.

The exact intersection volume is computed by successively clipping box
a's polytope against the six half-spaces of box b (Sutherland-Hodgman
generalized to 3D), then integrating the clipped polytope's volume via
the divergence theorem over its outward-oriented faces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import CORNER_SIGNS, Box3D, box_corners

_CLIP_EPS = 1e-12
_MERGE_EPS = 1e-9


def scale_box(b: Box3D, s: float) -> Box3D:
    """Scale a box about the camera origin: center and dims by s, rotation kept."""
    return Box3D(center=s * b.center, dims=s * b.dims, rotation=b.rotation)


def _box_faces(b: Box3D) -> list[np.ndarray]:
    """Six quadrilateral faces, each ordered counter-clockwise seen from outside."""
    corners = box_corners(b)
    faces = []
    for axis in range(3):
        for sign in (-1.0, 1.0):
            idx = np.flatnonzero(CORNER_SIGNS[:, axis] == sign)
            quad = corners[idx]
            normal = sign * b.rotation[:, axis]
            center = quad.mean(axis=0)
            t1 = quad[0] - center
            t1 = t1 / np.linalg.norm(t1)
            t2 = np.cross(normal, t1)
            ang = np.arctan2((quad - center) @ t2, (quad - center) @ t1)
            faces.append(quad[np.argsort(ang)])
    return faces


def _box_halfspaces(b: Box3D):
    """(normal, offset) pairs with the box interior satisfying n.x <= d."""
    half = b.dims / 2.0
    planes = []
    for axis in range(3):
        n = b.rotation[:, axis]
        c = float(n @ b.center)
        planes.append((n, c + half[axis]))
        planes.append((-n, -(c - half[axis])))
    return planes


def _clip_face(face: np.ndarray, n: np.ndarray, d: float):
    """Clip one polygon against n.x <= d; returns (kept polygon, crossing points)."""
    dist = face @ n - d
    if np.all(dist <= _CLIP_EPS):
        return face, []
    if np.all(dist >= -_CLIP_EPS):
        # fully removed, but vertices exactly on the plane must still seal
        # the cap (a clip plane coincident with a face would otherwise
        # leave the polytope open)
        return None, [face[i] for i in range(len(face)) if abs(dist[i]) <= _CLIP_EPS]
    out = []
    crossings = []
    k = len(face)
    for i in range(k):
        a, b_ = face[i], face[(i + 1) % k]
        da, db = dist[i], dist[(i + 1) % k]
        if da <= _CLIP_EPS:
            out.append(a)
        if (da <= _CLIP_EPS) != (db <= _CLIP_EPS):
            t = da / (da - db)
            p = a + t * (b_ - a)
            out.append(p)
            crossings.append(p)
    if len(out) < 3:
        return None, crossings
    return np.array(out), crossings


def _cap_face(points: list[np.ndarray], n: np.ndarray):
    """Order the clip-plane crossing points into a convex cap polygon with
    outward normal n."""
    if len(points) < 3:
        return None
    pts = np.array(points)
    # merge duplicates produced by adjacent faces
    kept: list[np.ndarray] = []
    for p in pts:
        if not any(np.linalg.norm(p - q) < _MERGE_EPS for q in kept):
            kept.append(p)
    if len(kept) < 3:
        return None
    pts = np.array(kept)
    center = pts.mean(axis=0)
    ref = pts[0] - center
    nref = np.linalg.norm(ref)
    if nref < _MERGE_EPS:
        return None
    t1 = ref / nref
    t2 = np.cross(n, t1)
    ang = np.arctan2((pts - center) @ t2, (pts - center) @ t1)
    return pts[np.argsort(ang)]


def _polytope_volume(faces: list[np.ndarray]) -> float:
    """Volume of a convex polytope given outward counter-clockwise faces."""
    vol = 0.0
    for face in faces:
        for i in range(1, len(face) - 1):
            vol += float(face[0] @ np.cross(face[i], face[i + 1]))
    return vol / 6.0


def intersection_volume(a: Box3D, b: Box3D) -> float:
    """Exact volume of the intersection of two oriented boxes."""
    faces = _box_faces(a)
    for n, d in _box_halfspaces(b):
        new_faces = []
        crossings: list[np.ndarray] = []
        for face in faces:
            kept, crossed = _clip_face(face, n, d)
            if kept is not None:
                new_faces.append(kept)
            crossings.extend(crossed)
        cap = _cap_face(crossings, n)
        if cap is not None:
            new_faces.append(cap)
        faces = new_faces
        if not faces:
            return 0.0
    return max(_polytope_volume(faces), 0.0)


def iou3d(a: Box3D, b: Box3D) -> float:
    """Exact IoU of two oriented 3D boxes, in [0, 1]."""
    inter = intersection_volume(a, b)
    union = a.volume + b.volume - inter
    if union <= 0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def points_in_box(points: np.ndarray, b: Box3D) -> np.ndarray:
    """Boolean mask of points inside the (closed) box."""
    local = (points - b.center) @ b.rotation
    return np.all(np.abs(local) <= b.dims / 2.0, axis=1)


def _count_numpy(pts, ca, Ra, ha, cb, Rb, hb):
    qa = np.abs(pts @ Ra - ca @ Ra) <= ha
    qb = np.abs(pts @ Rb - cb @ Rb) <= hb
    in_a = qa[:, 0] & qa[:, 1] & qa[:, 2]
    in_b = qb[:, 0] & qb[:, 1] & qb[:, 2]
    return int(np.count_nonzero(in_a & in_b)), int(np.count_nonzero(in_a | in_b))


try:  # optional numba fast path; the 1e6-sample oracle is hot in verification
    from numba import njit as _njit

    @_njit(cache=True)
    def _count_jit(pts, ca, Ra, ha, cb, Rb, hb):  # pragma: no cover - jitted
        n_inter = 0
        n_union = 0
        for i in range(pts.shape[0]):
            dx = pts[i, 0] - ca[0]
            dy = pts[i, 1] - ca[1]
            dz = pts[i, 2] - ca[2]
            in_a = (
                abs(dx * Ra[0, 0] + dy * Ra[1, 0] + dz * Ra[2, 0]) <= ha[0]
                and abs(dx * Ra[0, 1] + dy * Ra[1, 1] + dz * Ra[2, 1]) <= ha[1]
                and abs(dx * Ra[0, 2] + dy * Ra[1, 2] + dz * Ra[2, 2]) <= ha[2]
            )
            dx = pts[i, 0] - cb[0]
            dy = pts[i, 1] - cb[1]
            dz = pts[i, 2] - cb[2]
            in_b = (
                abs(dx * Rb[0, 0] + dy * Rb[1, 0] + dz * Rb[2, 0]) <= hb[0]
                and abs(dx * Rb[0, 1] + dy * Rb[1, 1] + dz * Rb[2, 1]) <= hb[1]
                and abs(dx * Rb[0, 2] + dy * Rb[1, 2] + dz * Rb[2, 2]) <= hb[2]
            )
            if in_a and in_b:
                n_inter += 1
            if in_a or in_b:
                n_union += 1
        return n_inter, n_union

    def _count(pts, ca, Ra, ha, cb, Rb, hb):
        return _count_jit(
            pts,
            ca.astype(pts.dtype), Ra.astype(pts.dtype), ha.astype(pts.dtype),
            cb.astype(pts.dtype), Rb.astype(pts.dtype), hb.astype(pts.dtype),
        )

except ImportError:  # pragma: no cover
    _count = _count_numpy


@dataclass(frozen=True)
class MonteCarloIoU:
    value: float
    stderr: float
    n_union: int


def iou3d_oracle(a: Box3D, b: Box3D, n: int = 1_000_000, seed: int = 0) -> MonteCarloIoU:
    """Rejection-sampling IoU estimate over the boxes' joint bounding volume.

    Conditioned on hitting the union, hits on the intersection are
    binomial, so the reported standard error is sqrt(p*(1-p)/n_union).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    corners = np.vstack([box_corners(a), box_corners(b)])
    lo = corners.min(axis=0).astype(np.float32)
    span = (corners.max(axis=0) - corners.min(axis=0)).astype(np.float32)
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 3), dtype=np.float32)
    pts *= span
    pts += lo
    n_inter, n_union = _count(
        pts, a.center, a.rotation, a.dims / 2.0, b.center, b.rotation, b.dims / 2.0
    )
    if n_union == 0:
        return MonteCarloIoU(0.0, 0.0, 0)
    p = n_inter / n_union
    stderr = float(np.sqrt(p * (1.0 - p) / n_union))
    return MonteCarloIoU(p, stderr, n_union)
