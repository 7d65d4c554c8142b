"""Annotation document schema and durable JSON persistence.

One JSON document per split: an `images` array (id, size, intrinsics as 9
row-major numbers, rejected flag) and an `annotations` array (image_id,
category, center_cam, dims, rotation 9 row-major, score, provenance).
Rejected objects keep a record with null geometry and a stage-tagged
reason, so pipeline failures stay visible downstream.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..geometry import Box3D, CameraIntrinsics

PROVENANCES = ("auto", "refined", "rejected")


def atomic_write_json(path, payload) -> None:
    """Write JSON durably: temp file in the same directory, fsync, rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


@dataclass(frozen=True)
class ImageInfo:
    image_id: str
    width: int
    height: int
    K: CameraIntrinsics
    rejected: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.image_id,
            "width": self.width,
            "height": self.height,
            "K": self.K.matrix.reshape(-1).tolist(),
            "rejected": self.rejected,
        }

    @staticmethod
    def from_dict(d: dict) -> "ImageInfo":
        k = np.asarray(d["K"], dtype=np.float64).reshape(3, 3)
        K = CameraIntrinsics(
            fx=k[0, 0], fy=k[1, 1], cx=k[0, 2], cy=k[1, 2],
            width=int(d["width"]), height=int(d["height"]),
        )
        return ImageInfo(str(d["id"]), int(d["width"]), int(d["height"]), K,
                         bool(d.get("rejected", False)))


@dataclass(frozen=True)
class AnnotationRecord:
    ann_id: str
    image_id: str
    category: str
    box: Box3D | None
    score: float = 1.0
    provenance: str = "auto"
    reason: str | None = None
    ignore: bool = False
    rev: int = 0

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")

    def to_dict(self) -> dict:
        return {
            "id": self.ann_id,
            "image_id": self.image_id,
            "category": self.category,
            "center_cam": None if self.box is None else self.box.center.tolist(),
            "dims": None if self.box is None else self.box.dims.tolist(),
            "R": None if self.box is None else self.box.rotation.reshape(-1).tolist(),
            "score": self.score,
            "provenance": self.provenance,
            "reason": self.reason,
            "ignore": self.ignore,
            "rev": self.rev,
        }

    @staticmethod
    def from_dict(d: dict) -> "AnnotationRecord":
        box = None
        if d.get("center_cam") is not None:
            box = Box3D(
                center=np.asarray(d["center_cam"], dtype=np.float64),
                dims=np.asarray(d["dims"], dtype=np.float64),
                rotation=np.asarray(d["R"], dtype=np.float64).reshape(3, 3),
            )
        return AnnotationRecord(
            ann_id=str(d["id"]),
            image_id=str(d["image_id"]),
            category=str(d["category"]),
            box=box,
            score=float(d.get("score", 1.0)),
            provenance=str(d.get("provenance", "auto")),
            reason=d.get("reason"),
            ignore=bool(d.get("ignore", False)),
            rev=int(d.get("rev", 0)),
        )


@dataclass
class AnnotationSet:
    images: list[ImageInfo] = field(default_factory=list)
    records: list[AnnotationRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "images": [im.to_dict() for im in self.images],
            "annotations": [r.to_dict() for r in self.records],
        }

    @staticmethod
    def from_dict(d: dict) -> "AnnotationSet":
        return AnnotationSet(
            images=[ImageInfo.from_dict(i) for i in d.get("images", [])],
            records=[AnnotationRecord.from_dict(a) for a in d.get("annotations", [])],
        )

    def image(self, image_id: str) -> ImageInfo | None:
        for im in self.images:
            if im.image_id == image_id:
                return im
        return None

    def record(self, ann_id: str) -> AnnotationRecord | None:
        for r in self.records:
            if r.ann_id == ann_id:
                return r
        return None


def save_annotations(path, aset: AnnotationSet) -> None:
    atomic_write_json(path, aset.to_dict())


def load_annotations(path) -> AnnotationSet:
    with open(path) as fh:
        return AnnotationSet.from_dict(json.load(fh))
