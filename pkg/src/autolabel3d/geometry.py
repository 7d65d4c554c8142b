"""Core geometric types and transforms.

Coordinate convention (OpenCV-style): right-handed camera frame with
+x right, +y down, +z forward into the scene.  Image coordinates have
the origin at the top-left pixel center, u to the right, v downward,
so a depth-map entry at (row r, col c) corresponds to pixel (u=c, v=r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMesh, NonPositiveDepth

ROTATION_TOL = 1e-6
DEGENERATE_FACE_AREA = 1e-12

# Corner sign pattern over (x, y, z) half-extents, fixed so corner order is
# deterministic across the whole codebase: (---, +--, ++-, -+-, --+, +-+, +++, -++).
CORNER_SIGNS = np.array(
    [
        [-1, -1, -1],
        [+1, -1, -1],
        [+1, +1, -1],
        [-1, +1, -1],
        [-1, -1, +1],
        [+1, -1, +1],
        [+1, +1, +1],
        [-1, +1, +1],
    ],
    dtype=np.float64,
)


def _as_array(x, shape=None) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if shape is not None and a.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {a.shape}")
    return a


def is_rotation(R: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        return False
    if not np.allclose(R.T @ R, np.eye(3), atol=tol):
        return False
    return abs(np.linalg.det(R) - 1.0) <= tol


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a (not necessarily unit) axis."""
    axis = _as_array(axis, (3,))
    n = np.linalg.norm(axis)
    if n == 0:
        raise ValueError("rotation axis must be nonzero")
    k = axis / n
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0, self.cx], [0, self.fy, self.cy], [0, 0, 1]], dtype=np.float64
        )

    @property
    def diagonal_px(self) -> float:
        return float(np.hypot(self.width, self.height))


@dataclass(frozen=True)
class Pose:
    """Rigid transform p_cam = R @ p + T (rotation 3x3, translation meters)."""

    R: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _as_array(self.R, (3, 3)))
        object.__setattr__(self, "T", _as_array(self.T, (3,)))
        if not is_rotation(self.R):
            raise ValueError("R is not a proper rotation matrix")

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def transform(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ self.R.T + self.T

    def inverse_transform(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return (points - self.T) @ self.R

    def inverse(self) -> "Pose":
        return Pose(self.R.T, -self.R.T @ self.T)

    def compose(self, other: "Pose") -> "Pose":
        """Pose applying `other` first, then self."""
        return Pose(self.R @ other.R, self.R @ other.T + self.T)


@dataclass(frozen=True)
class SimilarityTransform:
    """Scaled rigid transform v' = s * (R @ v) + T."""

    scale: float
    pose: Pose

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return self.scale * (points @ self.pose.R.T) + self.pose.T

    def inverse(self) -> "SimilarityTransform":
        s_inv = 1.0 / self.scale
        R_inv = self.pose.R.T
        return SimilarityTransform(s_inv, Pose(R_inv, -s_inv * (R_inv @ self.pose.T)))


@dataclass(frozen=True)
class Box3D:
    """Oriented 3D box: center (camera frame, m), extents (w, h, l) along the
    box-local x/y/z axes, and box-local-to-camera rotation."""

    center: np.ndarray
    dims: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center, (3,)))
        object.__setattr__(self, "dims", _as_array(self.dims, (3,)))
        object.__setattr__(self, "rotation", _as_array(self.rotation, (3, 3)))
        if np.any(self.dims <= 0):
            raise ValueError("box dims must be positive")
        if not is_rotation(self.rotation):
            raise ValueError("box rotation is not a proper rotation matrix")

    @property
    def volume(self) -> float:
        return float(np.prod(self.dims))

    def corners(self) -> np.ndarray:
        return box_corners(self)


@dataclass(frozen=True)
class TriangleMesh:
    """Triangle mesh: (N, 3) float vertices and (M, 3) int face indices."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")

    def triangles(self) -> np.ndarray:
        """(M, 3, 3) corner coordinates per face."""
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        tri = self.triangles()
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def centroid(self) -> np.ndarray:
        """Area-weighted surface centroid (falls back to vertex mean)."""
        areas = self.face_areas()
        if areas.sum() <= DEGENERATE_FACE_AREA:
            return self.vertices.mean(axis=0)
        face_centers = self.triangles().mean(axis=1)
        return (face_centers * areas[:, None]).sum(axis=0) / areas.sum()

    def bounding_radius(self) -> float:
        """Radius of the vertex bounding sphere around the centroid."""
        if len(self.vertices) == 0:
            return 0.0
        return float(np.linalg.norm(self.vertices - self.centroid(), axis=1).max())


@dataclass(frozen=True)
class PointSet:
    """A bag of 3D points in meters."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        object.__setattr__(self, "points", p)
        if p.size and not np.all(np.isfinite(p)):
            raise ValueError("points must be finite")

    def __len__(self) -> int:
        return len(self.points)


def project(p: np.ndarray, K: CameraIntrinsics):
    """Project camera-frame point(s) to pixel coordinates.

    Accepts a single (3,) point or an (N, 3) array; returns (pixel, depth)
    with matching leading shape.  Raises NonPositiveDepth if any z <= 0.
    """
    p = np.asarray(p, dtype=np.float64)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    z = pts[:, 2]
    if np.any(z <= 0):
        raise NonPositiveDepth("point at or behind the camera")
    u = K.fx * pts[:, 0] / z + K.cx
    v = K.fy * pts[:, 1] / z + K.cy
    pixel = np.stack([u, v], axis=-1)
    if single:
        return pixel[0], float(z[0])
    return pixel, z.copy()


def unproject(pixel: np.ndarray, depth, K: CameraIntrinsics) -> np.ndarray:
    """Lift pixel coordinate(s) plus depth back to camera-frame 3D point(s)."""
    pixel = np.asarray(pixel, dtype=np.float64)
    single = pixel.ndim == 1
    px = np.atleast_2d(pixel)
    z = np.atleast_1d(np.asarray(depth, dtype=np.float64))
    if np.any(z <= 0):
        raise NonPositiveDepth("depth must be positive")
    x = (px[:, 0] - K.cx) / K.fx * z
    y = (px[:, 1] - K.cy) / K.fy * z
    out = np.stack([x, y, z], axis=-1)
    return out[0] if single else out


def box_corners(b: Box3D) -> np.ndarray:
    """The 8 box corners in the fixed sign order of CORNER_SIGNS, (8, 3)."""
    local = CORNER_SIGNS * (b.dims / 2.0)
    return local @ b.rotation.T + b.center


def sample_mesh_surface(m: TriangleMesh, n: int, seed: int) -> PointSet:
    """Sample n points uniformly by area from the mesh surface.

    Faces are picked by cumulative-area inversion, then a point is drawn
    uniformly inside each face via reflected barycentric sampling.
    Deterministic for a fixed seed.  Degenerate faces (area < 1e-12) are
    excluded from the distribution.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    areas = m.face_areas()
    keep = areas > DEGENERATE_FACE_AREA
    if not np.any(keep):
        raise EmptyMesh("mesh has no non-degenerate face")
    face_idx = np.flatnonzero(keep)
    areas = areas[keep]

    rng = np.random.default_rng(seed)
    cum = np.cumsum(areas)
    picks = face_idx[np.searchsorted(cum, rng.random(n) * cum[-1])]

    tri = m.triangles()[picks]
    r = rng.random((n, 2))
    flip = r.sum(axis=1) > 1.0
    r[flip] = 1.0 - r[flip]
    pts = (
        tri[:, 0]
        + r[:, :1] * (tri[:, 1] - tri[:, 0])
        + r[:, 1:] * (tri[:, 2] - tri[:, 0])
    )
    return PointSet(pts)


def apply_similarity(m: TriangleMesh, t: SimilarityTransform) -> TriangleMesh:
    """Transform every vertex by v' = s * (R @ v) + T; faces are unchanged."""
    return TriangleMesh(t.apply(m.vertices), m.faces.copy())
