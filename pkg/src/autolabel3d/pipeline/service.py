"""HTTP review service backing the human-refinement UI.

All state lives in one annotation JSON document; every mutation is
persisted atomically (write-temp-rename) before the request is
acknowledged, and recorded in a sidecar audit log.  Boxes carry a
revision counter so concurrent editors get 409s instead of silently
overwriting each other.
"""

from __future__ import annotations

import datetime
import json
import logging
import math
import threading
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..geometry import Box3D, rotation_about_axis
from .annotations import load_annotations, save_annotations

log = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 200_000


class ReviewError(Exception):
    def __init__(self, status: int, reason: str):
        super().__init__(reason)
        self.status = status
        self.reason = reason


class ReviewStore:
    """Annotation document plus scene point maps, with durable mutations."""

    def __init__(self, annotations_path, scenes_dir=None, max_points: int = DEFAULT_MAX_POINTS):
        self.path = Path(annotations_path)
        self.scenes_dir = Path(scenes_dir) if scenes_dir else None
        self.max_points = max_points
        self.audit_path = self.path.with_name(self.path.name + ".audit.jsonl")
        self._lock = threading.Lock()
        try:
            self.aset = load_annotations(self.path)
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
            raise ValueError(f"cannot load annotations from {self.path}: {e}") from e

    # -- queries ---------------------------------------------------------

    def list_images(self) -> list[dict]:
        counts: dict[str, int] = {}
        for r in self.aset.records:
            counts[r.image_id] = counts.get(r.image_id, 0) + 1
        return [
            {
                "id": im.image_id,
                "width": im.width,
                "height": im.height,
                "rejected": im.rejected,
                "n_boxes": counts.get(im.image_id, 0),
            }
            for im in self.aset.images
        ]

    def get_image(self, image_id: str) -> dict:
        im = self.aset.image(image_id)
        if im is None:
            raise ReviewError(404, f"unknown image {image_id}")
        boxes = [r.to_dict() for r in self.aset.records if r.image_id == image_id]
        return {
            "image": im.to_dict(),
            "boxes": boxes,
            "points": self._load_points(image_id),
        }

    def _load_points(self, image_id: str) -> list:
        if self.scenes_dir is None:
            return []
        path = self.scenes_dir / f"{image_id}.npz"
        if not path.exists():
            return []
        with np.load(path) as data:
            points = data["points"]
        if len(points) > self.max_points:
            idx = np.linspace(0, len(points) - 1, self.max_points).astype(int)
            points = points[idx]
        return np.round(points, 4).tolist()

    def audit(self) -> list[dict]:
        if not self.audit_path.exists():
            return []
        entries = []
        with open(self.audit_path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return entries

    # -- mutations -------------------------------------------------------

    def patch_box(self, ann_id: str, delta: dict) -> dict:
        with self._lock:
            rec = self.aset.record(ann_id)
            if rec is None:
                raise ReviewError(404, f"unknown box {ann_id}")
            if rec.box is None:
                raise ReviewError(400, f"box {ann_id} has no geometry to edit")
            expected_rev = delta.get("rev")
            if expected_rev is not None and int(expected_rev) != rec.rev:
                raise ReviewError(409, f"box {ann_id} is at rev {rec.rev}")

            box = rec.box
            center = box.center
            dims = box.dims
            rotation = box.rotation
            if "center" in delta:
                d = _vec3(delta["center"], "center")
                center = center + d
            if "dims" in delta:
                d = _vec3(delta["dims"], "dims")
                dims = dims + d
                if np.any(dims <= 0):
                    raise ReviewError(400, "dims delta would make the box degenerate")
            if "yaw" in delta:
                try:
                    angle = float(delta["yaw"])
                except (TypeError, ValueError):
                    raise ReviewError(400, "yaw must be a number")
                if not math.isfinite(angle):
                    raise ReviewError(400, "yaw must be finite")
                # rotate about the box's own vertical axis
                rotation = rotation_about_axis(rotation[:, 1], angle) @ rotation
            if not ({"center", "dims", "yaw"} & set(delta)):
                raise ReviewError(400, "delta must set center, dims, or yaw")

            new_rec = replace(
                rec,
                box=Box3D(center=center, dims=dims, rotation=rotation),
                provenance="refined",
                rev=rec.rev + 1,
            )
            self._replace_record(ann_id, new_rec)
            self._persist()
            self._audit("patch", ann_id, {k: v for k, v in delta.items() if k != "rev"})
            return new_rec.to_dict()

    def delete_box(self, ann_id: str) -> dict:
        with self._lock:
            rec = self.aset.record(ann_id)
            if rec is None:
                raise ReviewError(404, f"unknown box {ann_id}")
            self.aset.records = [r for r in self.aset.records if r.ann_id != ann_id]
            self._persist()
            self._audit("delete", ann_id, {"category": rec.category})
            return {"deleted": ann_id}

    def reject_image(self, image_id: str) -> dict:
        with self._lock:
            im = self.aset.image(image_id)
            if im is None:
                raise ReviewError(404, f"unknown image {image_id}")
            self.aset.images = [
                replace(i, rejected=True) if i.image_id == image_id else i
                for i in self.aset.images
            ]
            self.aset.records = [
                replace(r, provenance="rejected") if r.image_id == image_id else r
                for r in self.aset.records
            ]
            self._persist()
            self._audit("reject", image_id, {})
            return {"rejected": image_id}

    # -- internals -------------------------------------------------------

    def _replace_record(self, ann_id, new_rec):
        self.aset.records = [
            new_rec if r.ann_id == ann_id else r for r in self.aset.records
        ]

    def _persist(self):
        save_annotations(self.path, self.aset)

    def _audit(self, action: str, target: str, detail: dict):
        entry = {
            "ts": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "action": action,
            "target": target,
            "detail": detail,
        }
        with open(self.audit_path, "a") as fh:
            fh.write(json.dumps(entry) + "\n")
            fh.flush()


def _vec3(value, name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64).reshape(3)
    except (TypeError, ValueError):
        raise ReviewError(400, f"{name} must be a 3-vector")
    if not np.all(np.isfinite(arr)):
        raise ReviewError(400, f"{name} must be finite")
    return arr


def create_app(store: ReviewStore, frontend_dir=None):
    """FastAPI app exposing the review endpoints over a store."""
    from fastapi import Body, FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="autolabel3d review service")

    @app.exception_handler(ReviewError)
    async def _review_error(request: Request, exc: ReviewError):
        return JSONResponse(status_code=exc.status, content={"reason": exc.reason})

    @app.get("/images")
    def images():
        return store.list_images()

    @app.get("/images/{image_id}")
    def image(image_id: str):
        return store.get_image(image_id)

    @app.patch("/boxes/{ann_id:path}")
    def patch_box(ann_id: str, delta: dict = Body(...)):
        return store.patch_box(ann_id, delta)

    @app.delete("/boxes/{ann_id:path}")
    def delete_box(ann_id: str):
        return store.delete_box(ann_id)

    @app.post("/images/{image_id}/reject")
    def reject(image_id: str):
        return store.reject_image(image_id)

    @app.get("/audit")
    def audit():
        return store.audit()

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def serve_review(annotations_path, scenes_dir, addr: str, frontend_dir=None):
    """Run the review service until interrupted; addr is host:port."""
    import uvicorn

    host, _, port = addr.rpartition(":")
    store = ReviewStore(annotations_path, scenes_dir)
    app = create_app(store, frontend_dir)
    log.info("serving review UI for %s on %s", annotations_path, addr)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
