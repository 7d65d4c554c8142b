"""Manifest-driven annotation: depth alignment, pose, scale, box fitting.

Each object runs through the full chain independently; a failure at any
stage produces a rejected record tagged with the stage name and error
class instead of aborting the image.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..boxfit import UpAxis, annotate_object
from ..depth_align import DepthScaleConfig, ScenePointMap, fit_depth_scale, unproject_scene
from ..depthio import load_depth, load_mask_png
from ..errors import AutoLabelError, ManifestInvalid
from ..meshio import load_mesh
from ..pose import (
    LiftConfig,
    PnPConfig,
    estimate_scale_median,
    lift_matches,
    place_object,
    solve_pnp_ransac,
)
from ..rasterizer import DepthMap, default_turntable_intrinsics, render, render_turntable
from .annotations import AnnotationRecord, AnnotationSet, ImageInfo
from .manifest import FilterConfig, ImageManifest, ObjectManifest, filter_instance, load_correspondences

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnotateConfig:
    seed: int = 0
    n_box_samples: int = 10000
    filter: FilterConfig = FilterConfig()
    depth: DepthScaleConfig = DepthScaleConfig()
    lift: LiftConfig = LiftConfig()
    pnp: PnPConfig = PnPConfig()


@dataclass(frozen=True)
class AnnotateResult:
    image: ImageInfo
    records: list[AnnotationRecord]
    scene_points: ScenePointMap | None

    def annotation_set(self) -> AnnotationSet:
        return AnnotationSet(images=[self.image], records=self.records)


class _StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}:{type(cause).__name__}")
        self.reason = f"{stage}:{type(cause).__name__}"


def _run_stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (AutoLabelError, ValueError, OSError) as e:
        raise _StageFailure(stage, e) from e


def annotate_image(m: ImageManifest, cfg: AnnotateConfig | None = None) -> AnnotateResult:
    """Run the full geometry chain for one image manifest."""
    cfg = cfg or AnnotateConfig()
    K = m.intrinsics
    try:
        d_rel = load_depth(m.resolve(m.relative_depth_path), m.width, m.height)
        d_metric = load_depth(m.resolve(m.metric_depth_path), m.width, m.height)
    except (OSError, ValueError) as e:
        raise ManifestInvalid(f"cannot load depth maps: {e}") from e
    if (d_rel.height, d_rel.width) != (m.height, m.width) or (
        d_metric.height, d_metric.width
    ) != (m.height, m.width):
        raise ManifestInvalid("depth dimensions do not match image size")

    image = ImageInfo(m.image_id, m.width, m.height, K)
    records: list[AnnotationRecord] = []

    depth_cfg = DepthScaleConfig(
        iterations=cfg.depth.iterations,
        inlier_rel_tol=cfg.depth.inlier_rel_tol,
        sample_count=cfg.depth.sample_count,
        seed=cfg.seed,
        with_shift=cfg.depth.with_shift,
    )
    try:
        fit = fit_depth_scale(d_rel, d_metric, depth_cfg)
    except AutoLabelError as e:
        reason = f"depth:{type(e).__name__}"
        log.warning("image %s: depth alignment failed (%s)", m.image_id, reason)
        for obj in m.objects:
            records.append(_rejected(m.image_id, obj, reason))
        return AnnotateResult(image, records, None)

    scene = unproject_scene(d_rel, fit, K)
    d_real = DepthMap(np.where(d_rel.valid(), fit.s_depth * d_rel.values + fit.shift, 0.0))

    for obj in m.objects:
        try:
            records.append(_annotate_object(m, obj, d_real, cfg))
        except _StageFailure as e:
            log.info("object %s rejected: %s", obj.object_id, e.reason)
            records.append(_rejected(m.image_id, obj, e.reason))
    return AnnotateResult(image, records, scene)


def _rejected(image_id: str, obj: ObjectManifest, reason: str) -> AnnotationRecord:
    return AnnotationRecord(
        ann_id=f"{image_id}/{obj.object_id}",
        image_id=image_id,
        category=obj.category,
        box=None,
        score=0.0,
        provenance="rejected",
        reason=reason,
    )


def _annotate_object(
    m: ImageManifest, obj: ObjectManifest, d_real: DepthMap, cfg: AnnotateConfig
) -> AnnotationRecord:
    K = m.intrinsics
    mask = _run_stage("filter", load_mask_png, m.resolve(obj.mask_path))
    if (mask.height, mask.width) != (m.height, m.width):
        raise _StageFailure("filter", ValueError("mask dimensions mismatch"))
    decision = filter_instance(mask, cfg.filter)
    if not decision.keep:
        raise _StageFailure("filter", AutoLabelError(decision.reason))

    mesh = _run_stage("mesh", load_mesh, m.resolve(obj.mesh_path))

    def _turntable():
        K_render, radius = default_turntable_intrinsics(
            mesh, obj.render.radius, obj.render.size, obj.render.fill
        )
        return render_turntable(mesh, obj.elevation_deg, obj.render.n_views, K_render, radius)

    views = _run_stage("render", _turntable)
    matches = _run_stage("match", load_correspondences, m.resolve(obj.correspondences_path))
    corrs = _run_stage("match", lift_matches, matches, views, cfg.lift)
    pnp_cfg = PnPConfig(
        iterations=cfg.pnp.iterations,
        reproj_thresh_px=cfg.pnp.reproj_thresh_px,
        seed=cfg.seed,
        confidence=cfg.pnp.confidence,
    )
    pnp = _run_stage("pnp", solve_pnp_ransac, corrs, K, pnp_cfg)

    if obj.correspondences_round2_path:
        view2 = _run_stage("render", render, mesh, K, pnp.pose, 0)
        matches2 = _run_stage(
            "match", load_correspondences, m.resolve(obj.correspondences_round2_path)
        )
        corrs2 = _run_stage("match", lift_matches, matches2, [view2], cfg.lift)
        pnp = _run_stage("pnp2", solve_pnp_ransac, corrs2, K, pnp_cfg)

    rendered = _run_stage("render", render, mesh, K, pnp.pose)
    s = _run_stage(
        "scale", estimate_scale_median, d_real, rendered.depth, mask, rendered.mask
    )
    posed, _transform = _run_stage("place", place_object, mesh, pnp, s)

    up_vec = pnp.pose.R @ np.array([0.0, 1.0, 0.0])
    up = UpAxis(up_vec / np.linalg.norm(up_vec))
    box = _run_stage("box", annotate_object, posed, up, cfg.n_box_samples, cfg.seed)

    return AnnotationRecord(
        ann_id=f"{m.image_id}/{obj.object_id}",
        image_id=m.image_id,
        category=obj.category,
        box=box,
        score=1.0,
        provenance="auto",
    )
