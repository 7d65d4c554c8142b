"""Pure numeric loss kernels: Chamfer box distance, per-attribute
disentangled losses, and the uncertainty-weighted total."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Box3D, CameraIntrinsics, box_corners, project, unproject

ATTRIBUTE_GROUPS = ("xy2d", "z", "dims", "rot")


@dataclass(frozen=True)
class BoxAttributes:
    """Detector-head parameterization of a box: projected center, depth,
    extents, and rotation."""

    xy2d: np.ndarray
    z: float
    dims: np.ndarray
    rot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xy2d", np.asarray(self.xy2d, dtype=np.float64).reshape(2))
        object.__setattr__(self, "dims", np.asarray(self.dims, dtype=np.float64).reshape(3))
        object.__setattr__(self, "rot", np.asarray(self.rot, dtype=np.float64).reshape(3, 3))
        if self.z <= 0:
            raise ValueError("depth must be positive")
        if np.any(self.dims <= 0):
            raise ValueError("dims must be positive")


def box_from_attributes(attrs: BoxAttributes, K: CameraIntrinsics) -> Box3D:
    center = unproject(attrs.xy2d, attrs.z, K)
    return Box3D(center=center, dims=attrs.dims, rotation=attrs.rot)


def attributes_from_box(box: Box3D, K: CameraIntrinsics) -> BoxAttributes:
    pixel, depth = project(box.center, K)
    return BoxAttributes(xy2d=pixel, z=depth, dims=box.dims, rot=box.rotation)


def chamfer_box(a: Box3D, b: Box3D, squared: bool = False) -> float:
    """Symmetric Chamfer distance between the two 8-corner sets.

    Mean over a's corners of the nearest-corner distance to b, plus the
    mirrored term.  Unsquared Euclidean by default.
    """
    ca = box_corners(a)
    cb = box_corners(b)
    d2 = ((ca[:, None, :] - cb[None, :, :]) ** 2).sum(axis=2)
    if squared:
        return float(d2.min(axis=1).mean() + d2.min(axis=0).mean())
    d = np.sqrt(d2)
    return float(d.min(axis=1).mean() + d.min(axis=0).mean())


@dataclass(frozen=True)
class DisentangledLosses:
    per_group: dict[str, float]
    holistic: float
    total: float


def disentangled_losses(
    pred: BoxAttributes, gt: BoxAttributes, K: CameraIntrinsics
) -> DisentangledLosses:
    """Per-attribute-group Chamfer losses plus the holistic term.

    Each group's loss rebuilds the box from the predicted value of that
    group and ground-truth values of every other, so the error of one
    attribute never leaks into another group's term.
    """
    gt_box = box_from_attributes(gt, K)
    per_group = {}
    for group in ATTRIBUTE_GROUPS:
        mixed = BoxAttributes(
            xy2d=pred.xy2d if group == "xy2d" else gt.xy2d,
            z=pred.z if group == "z" else gt.z,
            dims=pred.dims if group == "dims" else gt.dims,
            rot=pred.rot if group == "rot" else gt.rot,
        )
        per_group[group] = chamfer_box(box_from_attributes(mixed, K), gt_box)
    holistic = chamfer_box(box_from_attributes(pred, K), gt_box)
    total = sum(per_group.values()) + holistic
    return DisentangledLosses(per_group=per_group, holistic=holistic, total=total)


def uncertainty_loss(l3d: float, mu: float) -> float:
    """Uncertainty-weighted objective sqrt(2) * exp(-mu) * l3d + mu."""
    if l3d < 0:
        raise ValueError("l3d must be non-negative")
    return math.sqrt(2.0) * math.exp(-mu) * l3d + mu
