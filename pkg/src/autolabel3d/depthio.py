"""Depth and mask file formats: PFM, raw .f32, and 8-bit PNG masks.

PFM follows the usual convention: grayscale "Pf" header, a negative
scale for little-endian data, rows stored bottom-to-top.  Raw .f32 is
headerless row-major float32 and needs explicit dimensions on load.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .rasterizer import DepthMap, InstanceMask


def save_pfm(path, depth: DepthMap) -> None:
    data = depth.values.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{depth.width} {depth.height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(data[::-1].tobytes())


def load_pfm(path) -> DepthMap:
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"Pf":
            raise ValueError(f"{path} is not a grayscale PFM file")
        width, height = map(int, fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fh.read(width * height * 4), dtype=dtype)
        if data.size != width * height:
            raise ValueError(f"truncated PFM data in {path}")
        return DepthMap(data.reshape(height, width)[::-1].astype(np.float64))


def save_f32(path, depth: DepthMap) -> None:
    depth.values.astype("<f4").tofile(path)


def load_f32(path, width: int, height: int) -> DepthMap:
    data = np.fromfile(path, dtype="<f4")
    if data.size != width * height:
        raise ValueError(f"{path}: expected {width * height} floats, got {data.size}")
    return DepthMap(data.reshape(height, width).astype(np.float64))


def load_depth(path, width: int | None = None, height: int | None = None) -> DepthMap:
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        return load_pfm(path)
    if path.suffix.lower() == ".f32":
        if width is None or height is None:
            raise ValueError("raw .f32 depth needs explicit width/height")
        return load_f32(path, width, height)
    raise ValueError(f"unsupported depth format: {path.name}")


def save_mask_png(path, mask: InstanceMask) -> None:
    img = Image.fromarray(np.where(mask.values, 255, 0).astype(np.uint8), mode="L")
    img.save(path, format="PNG")


def load_mask_png(path) -> InstanceMask:
    img = Image.open(path).convert("L")
    return InstanceMask(np.asarray(img) > 127)
