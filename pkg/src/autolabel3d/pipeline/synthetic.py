"""Synthetic scene generation for end-to-end pipeline verification.

Primitive meshes (boxes, spheres, cylinders) are placed at random
gravity-aligned poses in front of a virtual camera.  The generator
renders the composite scene depth, derives a relative map by dividing
out a hidden scale, synthesizes turntable correspondences by forward
projection, and writes a manifest the annotation pipeline can consume
directly.  Everything is deterministic per seed.

Spheres and upright cylinders have no preferred yaw; their ground-truth
records carry a yaw_degenerate flag so comparisons can treat the
orientation as free.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..depthio import save_mask_png, save_pfm
from ..geometry import (
    Box3D,
    CameraIntrinsics,
    Pose,
    SimilarityTransform,
    TriangleMesh,
    apply_similarity,
    project,
    rotation_about_axis,
)
from ..meshio import save_obj
from ..pose import Match2D2D
from ..rasterizer import DepthMap, InstanceMask, default_turntable_intrinsics, render, render_turntable
from .annotations import AnnotationRecord, AnnotationSet, ImageInfo
from .manifest import ImageManifest, ObjectManifest, RenderSettings, save_correspondences, save_manifest

BACKDROP_DEPTH = 15.0


def box_mesh(w: float = 1.0, h: float = 1.0, l: float = 1.0) -> TriangleMesh:
    """Axis-aligned box centered at the origin, extents (w, h, l)."""
    hw, hh, hl = w / 2.0, h / 2.0, l / 2.0
    v = np.array(
        [
            [-hw, -hh, -hl], [hw, -hh, -hl], [hw, hh, -hl], [-hw, hh, -hl],
            [-hw, -hh, hl], [hw, -hh, hl], [hw, hh, hl], [-hw, hh, hl],
        ]
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # -z
            [4, 5, 6], [4, 6, 7],  # +z
            [0, 1, 5], [0, 5, 4],  # -y
            [3, 7, 6], [3, 6, 2],  # +y
            [0, 4, 7], [0, 7, 3],  # -x
            [1, 2, 6], [1, 6, 5],  # +x
        ]
    )
    return TriangleMesh(v, f)


def sphere_mesh(radius: float = 0.5, n_lat: int = 12, n_lon: int = 20) -> TriangleMesh:
    verts = [np.array([0.0, radius, 0.0])]
    for i in range(1, n_lat):
        phi = math.pi * i / n_lat
        for j in range(n_lon):
            theta = 2.0 * math.pi * j / n_lon
            verts.append(
                radius
                * np.array(
                    [math.sin(phi) * math.cos(theta), math.cos(phi), math.sin(phi) * math.sin(theta)]
                )
            )
    verts.append(np.array([0.0, -radius, 0.0]))
    faces = []
    for j in range(n_lon):
        faces.append([0, 1 + (j + 1) % n_lon, 1 + j])
    for i in range(n_lat - 2):
        ring0 = 1 + i * n_lon
        ring1 = ring0 + n_lon
        for j in range(n_lon):
            a, b = ring0 + j, ring0 + (j + 1) % n_lon
            c, d = ring1 + j, ring1 + (j + 1) % n_lon
            faces.append([a, b, d])
            faces.append([a, d, c])
    south = len(verts) - 1
    last = 1 + (n_lat - 2) * n_lon
    for j in range(n_lon):
        faces.append([south, last + j, last + (j + 1) % n_lon])
    return TriangleMesh(np.array(verts), np.array(faces))


def cylinder_mesh(radius: float = 0.4, height: float = 1.0, n_seg: int = 24) -> TriangleMesh:
    hh = height / 2.0
    ring_top = [
        np.array([radius * math.cos(2 * math.pi * j / n_seg), hh,
                  radius * math.sin(2 * math.pi * j / n_seg)])
        for j in range(n_seg)
    ]
    ring_bot = [v - np.array([0.0, height, 0.0]) for v in ring_top]
    verts = ring_top + ring_bot + [np.array([0.0, hh, 0.0]), np.array([0.0, -hh, 0.0])]
    top_c, bot_c = 2 * n_seg, 2 * n_seg + 1
    faces = []
    for j in range(n_seg):
        jn = (j + 1) % n_seg
        faces.append([top_c, jn, j])
        faces.append([bot_c, n_seg + j, n_seg + jn])
        faces.append([j, jn, n_seg + jn])
        faces.append([j, n_seg + jn, n_seg + j])
    return TriangleMesh(np.array(verts), np.array(faces))


@dataclass(frozen=True)
class SynthConfig:
    n_objects: int = 5
    shapes: tuple[str, ...] = ("box", "sphere", "cylinder")
    noise_px: float = 0.0
    outlier_rate: float = 0.0
    depth_noise: float = 0.0
    depth_outlier_rate: float = 0.0
    hidden_depth_scale: float | None = None
    width: int = 640
    height: int = 480
    focal: float = 600.0
    matches_per_view: int = 24
    render: RenderSettings = field(default_factory=RenderSettings)


@dataclass(frozen=True)
class SyntheticObject:
    object_id: str
    shape: str
    mesh: TriangleMesh  # canonical frame, +y up
    transform: SimilarityTransform  # canonical -> camera
    gt_box: Box3D
    mask: InstanceMask
    elevation_deg: float
    matches: list[Match2D2D]
    yaw_degenerate: bool


@dataclass(frozen=True)
class SyntheticScene:
    seed: int
    config: SynthConfig
    intrinsics: CameraIntrinsics
    depth_rel: DepthMap
    depth_metric: DepthMap
    hidden_scale: float
    objects: list[SyntheticObject]


def _primitive(shape: str, rng: np.random.Generator):
    """Canonical mesh plus its (w, h, l) extents and yaw degeneracy."""
    if shape == "box":
        w = rng.uniform(0.9, 1.3)
        l = w / rng.uniform(1.4, 2.2)
        h = rng.uniform(0.5, 1.2)
        return box_mesh(w, h, l), np.array([w, h, l]), False
    if shape == "sphere":
        r = rng.uniform(0.35, 0.6)
        return sphere_mesh(r), np.array([2 * r, 2 * r, 2 * r]), True
    if shape == "cylinder":
        r = rng.uniform(0.25, 0.45)
        h = rng.uniform(0.8, 1.4)
        return cylinder_mesh(r, h), np.array([2 * r, h, 2 * r]), True
    raise ValueError(f"unknown shape {shape!r}")


# canonical mesh +y maps to camera-frame up (-y): a half-turn about x
_FLIP = rotation_about_axis(np.array([1.0, 0.0, 0.0]), math.pi)
_UP_CAM = np.array([0.0, -1.0, 0.0])


def generate_synthetic_scene(seed: int, cfg: SynthConfig | None = None) -> SyntheticScene:
    cfg = cfg or SynthConfig()
    if cfg.n_objects < 1:
        raise ValueError("n_objects must be >= 1")
    rng = np.random.default_rng(seed)
    K = CameraIntrinsics(
        fx=cfg.focal, fy=cfg.focal, cx=cfg.width / 2.0, cy=cfg.height / 2.0,
        width=cfg.width, height=cfg.height,
    )
    hidden = cfg.hidden_depth_scale
    if hidden is None:
        hidden = float(rng.uniform(0.5, 4.0))

    # non-overlapping image cells keep masks clean and interior
    n_cols = math.ceil(math.sqrt(cfg.n_objects * cfg.width / cfg.height))
    n_rows = math.ceil(cfg.n_objects / n_cols)
    cell_w = cfg.width / n_cols
    cell_h = cfg.height / n_rows

    placed = []
    for i in range(cfg.n_objects):
        shape = cfg.shapes[int(rng.integers(len(cfg.shapes)))]
        mesh, extents, yaw_degenerate = _primitive(shape, rng)
        yaw = float(rng.uniform(-math.pi, math.pi))
        R_gt = rotation_about_axis(_UP_CAM, yaw) @ _FLIP
        s_gt = float(rng.uniform(0.6, 1.4))

        col, row = i % n_cols, i // n_cols
        cu = (col + 0.5) * cell_w + rng.uniform(-0.08, 0.08) * cell_w
        cv = (row + 0.5) * cell_h + rng.uniform(-0.08, 0.08) * cell_h
        target_r_px = rng.uniform(0.26, 0.36) * min(cell_w, cell_h)
        z = cfg.focal * s_gt * mesh.bounding_radius() / target_r_px
        T_gt = np.array([(cu - K.cx) / K.fx * z, (cv - K.cy) / K.fy * z, z])

        transform = SimilarityTransform(s_gt, Pose(R_gt, T_gt))
        gt_box = Box3D(center=T_gt, dims=s_gt * extents, rotation=R_gt)
        placed.append((shape, mesh, transform, gt_box, yaw_degenerate))

    # composite z-buffer over all posed objects, backdrop behind
    scene_depth = np.full((cfg.height, cfg.width), BACKDROP_DEPTH)
    owner = np.full((cfg.height, cfg.width), -1, dtype=np.int32)
    for i, (_, mesh, transform, _, _) in enumerate(placed):
        posed = apply_similarity(mesh, transform)
        view = render(posed, K, Pose.identity())
        closer = view.mask.values & (view.depth.values < scene_depth)
        scene_depth[closer] = view.depth.values[closer]
        owner[closer] = i

    depth_metric = scene_depth.copy()
    if cfg.depth_noise > 0:
        depth_metric *= 1.0 + cfg.depth_noise * rng.standard_normal(depth_metric.shape)
    if cfg.depth_outlier_rate > 0:
        bad = rng.random(depth_metric.shape) < cfg.depth_outlier_rate
        depth_metric[bad] *= 10.0
    depth_rel = scene_depth / hidden

    objects = []
    for i, (shape, mesh, transform, gt_box, yaw_degenerate) in enumerate(placed):
        mask = InstanceMask(owner == i)
        elevation = float(rng.uniform(8.0, 30.0))
        matches = _synth_matches(mesh, transform, elevation, K, cfg, rng)
        objects.append(
            SyntheticObject(
                object_id=f"obj{i}",
                shape=shape,
                mesh=mesh,
                transform=transform,
                gt_box=gt_box,
                mask=mask,
                elevation_deg=elevation,
                matches=matches,
                yaw_degenerate=yaw_degenerate,
            )
        )
    return SyntheticScene(
        seed=seed,
        config=cfg,
        intrinsics=K,
        depth_rel=DepthMap(depth_rel),
        depth_metric=DepthMap(depth_metric),
        hidden_scale=hidden,
        objects=objects,
    )


def _synth_matches(mesh, transform, elevation_deg, K_img, cfg, rng):
    """Forward-projected correspondences between turntable renders and the image."""
    K_render, radius = default_turntable_intrinsics(
        mesh, cfg.render.radius, cfg.render.size, cfg.render.fill
    )
    views = render_turntable(mesh, elevation_deg, cfg.render.n_views, K_render, radius)
    matches = []
    for view in views:
        rows, cols = np.nonzero(view.depth.valid())
        if rows.size == 0:
            continue
        take = min(cfg.matches_per_view, rows.size)
        pick = rng.choice(rows.size, size=take, replace=False)
        for r, c in zip(rows[pick], cols[pick]):
            depth = view.depth.values[r, c]
            x = (c - view.K.cx) / view.K.fx * depth
            y = (r - view.K.cy) / view.K.fy * depth
            X_world = view.pose.inverse_transform(np.array([x, y, depth]))
            p_cam = transform.apply(X_world)
            if p_cam[2] <= 0:
                continue
            x0, _ = project(p_cam, K_img)
            if cfg.noise_px > 0:
                x0 = x0 + cfg.noise_px * rng.standard_normal(2)
            if cfg.outlier_rate > 0 and rng.random() < cfg.outlier_rate:
                x0 = rng.uniform([0, 0], [K_img.width - 1, K_img.height - 1])
            matches.append(
                Match2D2D(x0=x0, x1=np.array([float(c), float(r)]), view_id=view.view_id)
            )
    return matches


def write_scene(scene: SyntheticScene, out_dir) -> Path:
    """Write the scene's manifest, inputs, and ground truth to a directory."""
    out = Path(out_dir)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    (out / "meshes").mkdir(exist_ok=True)
    (out / "corr").mkdir(exist_ok=True)

    save_pfm(out / "depth_rel.pfm", scene.depth_rel)
    save_pfm(out / "depth_metric.pfm", scene.depth_metric)

    object_manifests = []
    gt_records = []
    gt_meta = {}
    image_id = f"synth{scene.seed}"
    for obj in scene.objects:
        save_mask_png(out / "masks" / f"{obj.object_id}.png", obj.mask)
        save_obj(out / "meshes" / f"{obj.object_id}.obj", obj.mesh)
        save_correspondences(out / "corr" / f"{obj.object_id}.json", obj.matches)
        object_manifests.append(
            ObjectManifest(
                object_id=obj.object_id,
                category=obj.shape,
                mask_path=f"masks/{obj.object_id}.png",
                mesh_path=f"meshes/{obj.object_id}.obj",
                elevation_deg=obj.elevation_deg,
                correspondences_path=f"corr/{obj.object_id}.json",
                render=scene.config.render,
            )
        )
        gt_records.append(
            AnnotationRecord(
                ann_id=f"{image_id}/{obj.object_id}",
                image_id=image_id,
                category=obj.shape,
                box=obj.gt_box,
            )
        )
        gt_meta[obj.object_id] = {
            "scale": obj.transform.scale,
            "R": obj.transform.pose.R.reshape(-1).tolist(),
            "T": obj.transform.pose.T.tolist(),
            "yaw_degenerate": obj.yaw_degenerate,
        }

    manifest = ImageManifest(
        image_id=image_id,
        width=scene.intrinsics.width,
        height=scene.intrinsics.height,
        intrinsics=scene.intrinsics,
        relative_depth_path="depth_rel.pfm",
        metric_depth_path="depth_metric.pfm",
        objects=object_manifests,
        base_dir=out,
    )
    save_manifest(out / "manifest.json", manifest)

    gt_set = AnnotationSet(
        images=[ImageInfo(image_id, scene.intrinsics.width, scene.intrinsics.height,
                          scene.intrinsics)],
        records=gt_records,
    )
    payload = gt_set.to_dict()
    payload["meta"] = {"hidden_depth_scale": scene.hidden_scale, "objects": gt_meta,
                       "seed": scene.seed}
    with open(out / "ground_truth.json", "w") as fh:
        json.dump(payload, fh, indent=1)
    return out / "manifest.json"
