"""Per-image input manifests and instance filtering.

A manifest names everything the geometry stages need for one image:
depth maps, intrinsics, and per-object masks, meshes, elevations, and
correspondence files.  Outputs of upstream neural models only ever
enter through these files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ManifestInvalid
from ..geometry import CameraIntrinsics
from ..pose import Match2D2D
from ..rasterizer import InstanceMask


@dataclass(frozen=True)
class FilterConfig:
    min_area_px: int = 400
    border_margin_px: int = 10


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None  # "too_small" | "truncated"


def filter_instance(mask: InstanceMask, cfg: FilterConfig | None = None) -> FilterDecision:
    """Drop masks that are too small or truncated by the image boundary.

    Truncation counts mask pixels on the 1-px image border; strictly more
    than border_margin_px of them rejects the object.
    """
    cfg = cfg or FilterConfig()
    area = mask.area
    if area < cfg.min_area_px:
        return FilterDecision(False, "too_small")
    v = mask.values
    border = int(v[0, :].sum() + v[-1, :].sum() + v[1:-1, 0].sum() + v[1:-1, -1].sum())
    if border > cfg.border_margin_px:
        return FilterDecision(False, "truncated")
    return FilterDecision(True, None)


@dataclass(frozen=True)
class RenderSettings:
    n_views: int = 8
    size: int = 512
    fill: float = 0.8
    radius: float | None = None

    def to_dict(self) -> dict:
        return {"n_views": self.n_views, "size": self.size, "fill": self.fill,
                "radius": self.radius}

    @staticmethod
    def from_dict(d: dict) -> "RenderSettings":
        return RenderSettings(
            n_views=int(d.get("n_views", 8)),
            size=int(d.get("size", 512)),
            fill=float(d.get("fill", 0.8)),
            radius=d.get("radius"),
        )


@dataclass(frozen=True)
class ObjectManifest:
    object_id: str
    category: str
    mask_path: str
    mesh_path: str
    elevation_deg: float
    correspondences_path: str
    correspondences_round2_path: str | None = None
    amodal: bool = True
    render: RenderSettings = field(default_factory=RenderSettings)

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "category": self.category,
            "mask": self.mask_path,
            "mesh": self.mesh_path,
            "elevation_deg": self.elevation_deg,
            "correspondences": self.correspondences_path,
            "correspondences_round2": self.correspondences_round2_path,
            "amodal": self.amodal,
            "render": self.render.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ObjectManifest":
        try:
            return ObjectManifest(
                object_id=str(d["object_id"]),
                category=str(d["category"]),
                mask_path=str(d["mask"]),
                mesh_path=str(d["mesh"]),
                elevation_deg=float(d["elevation_deg"]),
                correspondences_path=str(d["correspondences"]),
                correspondences_round2_path=d.get("correspondences_round2"),
                amodal=bool(d.get("amodal", True)),
                render=RenderSettings.from_dict(d.get("render", {})),
            )
        except KeyError as e:
            raise ManifestInvalid(f"object manifest missing field {e}") from e


@dataclass(frozen=True)
class ImageManifest:
    image_id: str
    width: int
    height: int
    intrinsics: CameraIntrinsics
    relative_depth_path: str
    metric_depth_path: str
    objects: list[ObjectManifest] = field(default_factory=list)
    base_dir: Path = Path(".")

    def resolve(self, rel_path: str) -> Path:
        return self.base_dir / rel_path

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "width": self.width,
            "height": self.height,
            "intrinsics": {
                "fx": self.intrinsics.fx, "fy": self.intrinsics.fy,
                "cx": self.intrinsics.cx, "cy": self.intrinsics.cy,
            },
            "relative_depth": self.relative_depth_path,
            "metric_depth": self.metric_depth_path,
            "objects": [o.to_dict() for o in self.objects],
        }


def load_manifest(path) -> ImageManifest:
    path = Path(path)
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestInvalid(f"cannot read manifest {path}: {e}") from e
    try:
        intr = d["intrinsics"]
        K = CameraIntrinsics(
            fx=float(intr["fx"]), fy=float(intr["fy"]),
            cx=float(intr["cx"]), cy=float(intr["cy"]),
            width=int(d["width"]), height=int(d["height"]),
        )
        manifest = ImageManifest(
            image_id=str(d["image_id"]),
            width=int(d["width"]),
            height=int(d["height"]),
            intrinsics=K,
            relative_depth_path=str(d["relative_depth"]),
            metric_depth_path=str(d["metric_depth"]),
            objects=[ObjectManifest.from_dict(o) for o in d.get("objects", [])],
            base_dir=path.parent,
        )
    except (KeyError, ValueError) as e:
        raise ManifestInvalid(f"malformed manifest {path}: {e}") from e
    for rel in (manifest.relative_depth_path, manifest.metric_depth_path):
        if not manifest.resolve(rel).exists():
            raise ManifestInvalid(f"manifest references missing file {rel}")
    for obj in manifest.objects:
        for rel in (obj.mask_path, obj.mesh_path, obj.correspondences_path):
            if not manifest.resolve(rel).exists():
                raise ManifestInvalid(
                    f"object {obj.object_id} references missing file {rel}"
                )
        if obj.correspondences_round2_path and not manifest.resolve(
            obj.correspondences_round2_path
        ).exists():
            raise ManifestInvalid(
                f"object {obj.object_id} references missing round-2 file"
            )
    return manifest


def save_manifest(path, manifest: ImageManifest) -> None:
    with open(path, "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=1)


CORR_FIELDS = ("view_id", "x0_x", "x0_y", "x1_x", "x1_y", "confidence")


def load_correspondences(path) -> list[Match2D2D]:
    """Read a correspondence file (JSON array or headered CSV)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            rows = json.load(fh)
    elif path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    else:
        raise ValueError(f"unsupported correspondence format: {path.name}")
    matches = []
    for row in rows:
        matches.append(
            Match2D2D(
                x0=np.array([float(row["x0_x"]), float(row["x0_y"])]),
                x1=np.array([float(row["x1_x"]), float(row["x1_y"])]),
                view_id=int(row["view_id"]),
                confidence=float(row.get("confidence", 1.0)),
            )
        )
    return matches


def save_correspondences(path, matches: list[Match2D2D]) -> None:
    path = Path(path)
    rows = [
        {
            "view_id": m.view_id,
            "x0_x": m.x0[0], "x0_y": m.x0[1],
            "x1_x": m.x1[0], "x1_y": m.x1[1],
            "confidence": m.confidence,
        }
        for m in matches
    ]
    if path.suffix.lower() == ".json":
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=0)
    elif path.suffix.lower() == ".csv":
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CORR_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
    else:
        raise ValueError(f"unsupported correspondence format: {path.name}")
