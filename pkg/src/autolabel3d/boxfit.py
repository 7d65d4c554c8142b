"""Gravity-aligned oriented box fitting from surface point samples.

The vertical box axis is pinned to a given up direction; yaw comes from
PCA of the points projected onto the horizontal plane, and the extents
are the tight min/max in the resulting box frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePlaneProjection, EmptyPointSet
from .geometry import Box3D, PointSet, TriangleMesh, sample_mesh_surface

MIN_DIM = 1e-6
# Sample covariance eigenvalues of an isotropic cloud differ by a few
# percent at n ~ 10k, so a ulp-level tie threshold would hand isotropic
# shapes an arbitrary noise-driven yaw.
EIGENVALUE_TIE_RATIO = 1.05


@dataclass(frozen=True)
class UpAxis:
    """Unit vector of the scene's upward direction in the camera frame."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(u) - 1.0) > 1e-9:
            raise ValueError("up axis must be a unit vector")
        object.__setattr__(self, "u", u)

    @staticmethod
    def camera_up() -> "UpAxis":
        """Camera-frame fallback: -y (image up)."""
        return UpAxis(np.array([0.0, -1.0, 0.0]))


def horizontal_basis(up: UpAxis) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis (e1, e2) of the plane orthogonal to up.

    e2 = up x e1, so an in-plane angle measured as atan2(p.e2, p.e1)
    increases under right-handed rotation about the up vector.
    """
    u = up.u
    ref = np.array([0.0, 0.0, 1.0]) if abs(u[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(ref, u)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return e1, e2


def estimate_yaw_pca(pts: PointSet, up: UpAxis) -> float:
    """Dominant horizontal orientation of a point set, in [-pi/2, pi/2).

    Points are projected onto the plane orthogonal to up; the yaw is the
    angle of the leading eigenvector of their 2D covariance.  Near-isotropic
    eigenvalues (ratio < 1 + 1e-6) fall back to yaw 0.
    """
    if len(pts) < 3:
        raise EmptyPointSet("need >= 3 points for yaw estimation")
    e1, e2 = horizontal_basis(up)
    xy = np.stack([pts.points @ e1, pts.points @ e2], axis=1)
    xy = xy - xy.mean(axis=0)
    cov = (xy.T @ xy) / len(xy)
    evals, evecs = np.linalg.eigh(cov)  # ascending
    if evals[1] <= 1e-18:
        raise DegeneratePlaneProjection("points project to a single point")
    if evals[1] < EIGENVALUE_TIE_RATIO * max(evals[0], 0.0):
        return 0.0
    dominant = evecs[:, 1]
    yaw = math.atan2(dominant[1], dominant[0])
    return canonicalize_yaw(yaw)


def canonicalize_yaw(yaw: float) -> float:
    """Wrap a yaw angle into [-pi/2, pi/2); PCA axes are pi-ambiguous."""
    return (yaw + math.pi / 2.0) % math.pi - math.pi / 2.0


def box_rotation(up: UpAxis, yaw: float) -> np.ndarray:
    """Rotation whose y column is up and whose x column is the canonical
    horizontal basis rotated by yaw about up."""
    e1, e2 = horizontal_basis(up)
    x_box = math.cos(yaw) * e1 + math.sin(yaw) * e2
    z_box = np.cross(x_box, up.u)
    return np.stack([x_box, up.u, z_box], axis=1)


def fit_tight_box(pts: PointSet, up: UpAxis, yaw: float) -> Box3D:
    """Tight oriented box around the points at the given up/yaw frame.

    Dims are the per-axis extent in the box frame (clamped to 1e-6 m so
    degenerate sets still form a valid box); the center is the extent
    midpoint mapped back to the camera frame.
    """
    if len(pts) < 1:
        raise EmptyPointSet("cannot fit a box around zero points")
    R = box_rotation(up, yaw)
    local = pts.points @ R
    lo = local.min(axis=0)
    hi = local.max(axis=0)
    dims = np.maximum(hi - lo, MIN_DIM)
    center = R @ ((hi + lo) / 2.0)
    return Box3D(center=center, dims=dims, rotation=R)


def annotate_object(
    posed: TriangleMesh, up: UpAxis, n_samples: int = 10000, seed: int = 0
) -> Box3D:
    """Surface-sample a posed mesh and fit its gravity-aligned box."""
    pts = sample_mesh_surface(posed, n_samples, seed)
    yaw = estimate_yaw_pca(pts, up)
    return fit_tight_box(pts, up, yaw)
