"""Aligns an affine-invariant relative depth map to metric scale.

The model is a single global scale (d_metric ~ s * d_rel), fit by RANSAC
over per-pixel ratio hypotheses and refined by least squares over the
inlier set.  A scale+shift variant exists behind a config flag but is off
by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDepth, InsufficientOverlap
from .geometry import CameraIntrinsics
from .rasterizer import DepthMap

MIN_JOINT_VALID = 100


@dataclass(frozen=True)
class DepthScaleConfig:
    iterations: int = 2000
    inlier_rel_tol: float = 0.05
    sample_count: int = 5000
    seed: int = 0
    with_shift: bool = False


@dataclass(frozen=True)
class DepthScaleFit:
    """Meters per relative-depth unit plus the fit's support."""

    s_depth: float
    shift: float
    inlier_ratio: float
    n_samples: int

    def __post_init__(self):
        if self.s_depth <= 0:
            raise ValueError("s_depth must be positive")
        if not 0.0 <= self.inlier_ratio <= 1.0:
            raise ValueError("inlier_ratio must be in [0, 1]")


@dataclass(frozen=True)
class ScenePointMap:
    """Per-pixel metric 3D points with a validity grid."""

    points: np.ndarray  # (H, W, 3)
    valid: np.ndarray  # (H, W) bool

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64)
        v = np.asarray(self.valid, dtype=bool)
        if p.ndim != 3 or p.shape[2] != 3 or p.shape[:2] != v.shape:
            raise ValueError("points must be (H, W, 3) with matching validity grid")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "valid", v)

    @property
    def height(self) -> int:
        return self.points.shape[0]

    @property
    def width(self) -> int:
        return self.points.shape[1]

    def valid_points(self) -> np.ndarray:
        return self.points[self.valid]


def _ls_scale(rel: np.ndarray, met: np.ndarray) -> float:
    return float(np.dot(rel, met) / np.dot(rel, rel))


def _ls_scale_shift(rel: np.ndarray, met: np.ndarray):
    A = np.stack([rel, np.ones_like(rel)], axis=1)
    sol, *_ = np.linalg.lstsq(A, met, rcond=None)
    return float(sol[0]), float(sol[1])


def fit_depth_scale(
    d_rel: DepthMap, d_metric: DepthMap, cfg: DepthScaleConfig | None = None
) -> DepthScaleFit:
    """Robustly fit the scale mapping relative depth to metric depth.

    A pixel is an inlier of scale s when |s*d_rel - d_metric| / d_metric
    <= inlier_rel_tol.  Pixels invalid (<= 0 or non-finite) in either map
    are excluded before sampling.  Deterministic for a fixed seed.
    """
    cfg = cfg or DepthScaleConfig()
    if (d_rel.height, d_rel.width) != (d_metric.height, d_metric.width):
        raise ValueError("depth maps must share dimensions")
    if not np.any(d_rel.values != 0):
        raise DegenerateDepth("relative depth is identically zero")

    joint = d_rel.valid() & d_metric.valid()
    rel = d_rel.values[joint]
    met = d_metric.values[joint]
    if rel.size < MIN_JOINT_VALID:
        raise InsufficientOverlap(
            f"only {rel.size} jointly valid pixels (need {MIN_JOINT_VALID})"
        )

    rng = np.random.default_rng(cfg.seed)
    if rel.size > cfg.sample_count:
        pick = rng.choice(rel.size, size=cfg.sample_count, replace=False)
        rel, met = rel[pick], met[pick]
    n = rel.size

    if cfg.with_shift:
        best_inliers = _ransac_scale_shift(rel, met, cfg, rng)
    else:
        best_inliers = _ransac_scale(rel, met, cfg, rng)

    if cfg.with_shift:
        s, b = _ls_scale_shift(rel[best_inliers], met[best_inliers])
        resid = np.abs(s * rel + b - met) / met
    else:
        s = _ls_scale(rel[best_inliers], met[best_inliers])
        b = 0.0
        resid = np.abs(s * rel - met) / met
    inlier_ratio = float(np.count_nonzero(resid <= cfg.inlier_rel_tol)) / n
    return DepthScaleFit(s_depth=s, shift=b, inlier_ratio=inlier_ratio, n_samples=n)


def _ransac_scale(rel, met, cfg, rng):
    best_count = -1
    best_inliers = None
    hyp_idx = rng.integers(0, rel.size, size=cfg.iterations)
    for j in hyp_idx:
        if rel[j] <= 0:
            continue
        s = met[j] / rel[j]
        inliers = np.abs(s * rel - met) <= cfg.inlier_rel_tol * met
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
    if best_inliers is None or not best_inliers.any():
        raise DegenerateDepth("no RANSAC hypothesis produced inliers")
    return best_inliers


def _ransac_scale_shift(rel, met, cfg, rng):
    best_count = -1
    best_inliers = None
    pairs = rng.integers(0, rel.size, size=(cfg.iterations, 2))
    for j, k in pairs:
        dr = rel[j] - rel[k]
        if abs(dr) < 1e-12:
            continue
        s = (met[j] - met[k]) / dr
        if s <= 0:
            continue
        b = met[j] - s * rel[j]
        inliers = np.abs(s * rel + b - met) <= cfg.inlier_rel_tol * met
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
    if best_inliers is None or not best_inliers.any():
        raise DegenerateDepth("no RANSAC hypothesis produced inliers")
    return best_inliers


def unproject_scene(d_rel: DepthMap, fit: DepthScaleFit, K: CameraIntrinsics) -> ScenePointMap:
    """Unproject the scaled relative depth into a metric scene point map."""
    z = fit.s_depth * d_rel.values + fit.shift
    valid = d_rel.valid() & (z > 0)
    h, w = d_rel.values.shape
    us, vs = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    x = (us - K.cx) / K.fx * z
    y = (vs - K.cy) / K.fy * z
    points = np.stack([x, y, z], axis=-1)
    points[~valid] = 0.0
    return ScenePointMap(points, valid)
