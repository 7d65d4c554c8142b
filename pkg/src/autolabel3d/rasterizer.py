"""Software z-buffer renderer for triangle meshes.

Produces per-pixel depth maps and binary coverage masks.  Depth is
camera-space z, interpolated perspective-correctly (1/z is affine in
screen space).  Pixel (row r, col c) is sampled at image coordinate
(u=c, v=r); there is no anti-aliasing, masks stay binary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMesh
from .geometry import CameraIntrinsics, Pose, TriangleMesh

NEAR_PLANE = 1e-4
INVALID_DEPTH = 0.0


@dataclass(frozen=True)
class DepthMap:
    """Row-major float depth grid in meters; 0.0 marks invalid pixels."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("depth map must be a non-empty 2D grid")
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def valid(self) -> np.ndarray:
        return np.isfinite(self.values) & (self.values > 0)


@dataclass(frozen=True)
class InstanceMask:
    """Row-major binary grid marking an object's pixels."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values).astype(bool)
        if v.ndim != 2:
            raise ValueError("mask must be a 2D grid")
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def area(self) -> int:
        return int(self.values.sum())


@dataclass(frozen=True)
class RenderedView:
    depth: DepthMap
    mask: InstanceMask
    K: CameraIntrinsics
    pose: Pose  # world -> camera
    view_id: int

    def __post_init__(self):
        if (self.depth.height, self.depth.width) != (self.mask.height, self.mask.width):
            raise ValueError("depth and mask dimensions differ")


def _clip_polygon_near(poly_cam: np.ndarray, znear: float) -> np.ndarray:
    """Clip a camera-space polygon against z >= znear (Sutherland-Hodgman)."""
    out = []
    n = len(poly_cam)
    for i in range(n):
        a = poly_cam[i]
        b = poly_cam[(i + 1) % n]
        a_in = a[2] >= znear
        b_in = b[2] >= znear
        if a_in:
            out.append(a)
        if a_in != b_in:
            t = (znear - a[2]) / (b[2] - a[2])
            out.append(a + t * (b - a))
    return np.array(out) if out else np.empty((0, 3))


def _zbuffer(mesh: TriangleMesh, K: CameraIntrinsics, pose: Pose) -> np.ndarray:
    h, w = K.height, K.width
    zbuf = np.full((h, w), np.inf)
    verts_cam = mesh.vertices @ pose.R.T + pose.T

    for face in mesh.faces:
        tri_cam = verts_cam[face]
        if np.all(tri_cam[:, 2] < NEAR_PLANE):
            continue
        if np.any(tri_cam[:, 2] < NEAR_PLANE):
            poly = _clip_polygon_near(tri_cam, NEAR_PLANE)
        else:
            poly = tri_cam
        if len(poly) < 3:
            continue
        # fan-triangulate the clipped polygon (at most 4 vertices)
        for k in range(1, len(poly) - 1):
            _raster_triangle(zbuf, poly[[0, k, k + 1]], K)
    return zbuf


def _raster_triangle(zbuf: np.ndarray, tri_cam: np.ndarray, K: CameraIntrinsics) -> None:
    h, w = zbuf.shape
    z = tri_cam[:, 2]
    u = K.fx * tri_cam[:, 0] / z + K.cx
    v = K.fy * tri_cam[:, 1] / z + K.cy

    x0 = max(0, int(math.ceil(u.min())))
    x1 = min(w - 1, int(math.floor(u.max())))
    y0 = max(0, int(math.ceil(v.min())))
    y1 = min(h - 1, int(math.floor(v.max())))
    if x0 > x1 or y0 > y1:
        return

    # signed twice-area of the projected triangle; degenerate edges-on
    # triangles contribute nothing
    denom = (u[1] - u[0]) * (v[2] - v[0]) - (u[2] - u[0]) * (v[1] - v[0])
    if abs(denom) < 1e-12:
        return

    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    px, py = np.meshgrid(xs, ys)

    l0 = ((u[1] - px) * (v[2] - py) - (u[2] - px) * (v[1] - py)) / denom
    l1 = ((u[2] - px) * (v[0] - py) - (u[0] - px) * (v[2] - py)) / denom
    l2 = ((u[0] - px) * (v[1] - py) - (u[1] - px) * (v[0] - py)) / denom
    inside = (l0 >= -1e-12) & (l1 >= -1e-12) & (l2 >= -1e-12)
    if not inside.any():
        return

    # normalize by the computed barycentric sum so equal-depth triangles
    # interpolate to their depth bit-exactly
    lam_sum = l0 + l1 + l2
    inv_z = (l0 / z[0] + l1 / z[1] + l2 / z[2]) / lam_sum
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        depth = 1.0 / inv_z
    ok = inside & (inv_z > 0) & (depth >= NEAR_PLANE)

    window = zbuf[y0 : y1 + 1, x0 : x1 + 1]
    closer = ok & (depth < window)
    window[closer] = depth[closer]


def render(m: TriangleMesh, K: CameraIntrinsics, pose: Pose, view_id: int = 0) -> RenderedView:
    """Render a mesh under a world-to-camera pose into depth + mask buffers."""
    if len(m.vertices) == 0 or len(m.faces) == 0:
        raise EmptyMesh("cannot render an empty mesh")
    zbuf = _zbuffer(m, K, pose)
    covered = np.isfinite(zbuf)
    depth = np.where(covered, zbuf, INVALID_DEPTH)
    return RenderedView(DepthMap(depth), InstanceMask(covered), K, pose, view_id)


def look_at_pose(eye: np.ndarray, target: np.ndarray, up: np.ndarray) -> Pose:
    """World-to-camera pose of a camera at `eye` looking at `target`.

    `up` is the world up direction; the camera's +y axis (image down) is
    anti-aligned with it.  Falls back to an arbitrary reference if the
    view direction is parallel to `up`.
    """
    eye = np.asarray(eye, dtype=np.float64)
    z_cam = np.asarray(target, dtype=np.float64) - eye
    z_cam = z_cam / np.linalg.norm(z_cam)
    up = np.asarray(up, dtype=np.float64)
    if abs(np.dot(z_cam, up) / np.linalg.norm(up)) > 1.0 - 1e-8:
        up = np.array([1.0, 0.0, 0.0]) if abs(z_cam[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
    x_cam = np.cross(z_cam, up)
    x_cam = x_cam / np.linalg.norm(x_cam)
    y_cam = np.cross(z_cam, x_cam)
    R_wc = np.stack([x_cam, y_cam, z_cam], axis=1)
    R = R_wc.T
    return Pose(R, -R @ eye)


def default_turntable_intrinsics(
    m: TriangleMesh, radius: float | None = None, size: int = 512, fill: float = 0.8
):
    """Square intrinsics + orbit radius framing the mesh at `fill` of the image.

    Radius defaults to 3x the bounding radius; focal length is chosen so the
    bounding sphere projects to `fill` of the half-extent.
    """
    r = m.bounding_radius()
    if r <= 0:
        raise EmptyMesh("mesh has no spatial extent")
    if radius is None:
        radius = 3.0 * r
    f = fill * (size / 2.0) * radius / r
    K = CameraIntrinsics(fx=f, fy=f, cx=size / 2.0, cy=size / 2.0, width=size, height=size)
    return K, radius


def render_turntable(
    m: TriangleMesh,
    elevation_deg: float,
    n_views: int,
    K: CameraIntrinsics | None = None,
    radius: float | None = None,
) -> list[RenderedView]:
    """Render n_views orbit views at a fixed elevation, azimuths 360/n apart.

    The mesh lives in its canonical frame with +y up; cameras sit on a
    circle of the given radius around the surface centroid, all looking at
    it.  View i gets azimuth i * (360 / n_views) degrees and view_id i.
    """
    if n_views < 1:
        raise ValueError("n_views must be >= 1")
    if K is None or radius is None:
        K_auto, radius_auto = default_turntable_intrinsics(m, radius)
        K = K or K_auto
        radius = radius or radius_auto

    center = m.centroid()
    up = np.array([0.0, 1.0, 0.0])
    el = math.radians(elevation_deg)
    views = []
    for i in range(n_views):
        az = math.radians(i * 360.0 / n_views)
        direction = np.array(
            [math.sin(az) * math.cos(el), math.sin(el), math.cos(az) * math.cos(el)]
        )
        eye = center + radius * direction
        pose = look_at_pose(eye, center, up)
        views.append(render(m, K, pose, view_id=i))
    return views
