"""Mesh file ingestion: ASCII OBJ and binary little-endian PLY.

OBJ: only v/f records are honored; face indices are 1-based (negative
indices count from the end) and polygons are fan-triangulated.
PLY: binary_little_endian 1.0 with float32 vertex x/y/z and an int32
vertex index list per face.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .geometry import TriangleMesh


def load_mesh(path) -> TriangleMesh:
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".obj":
        return load_obj(path)
    if ext == ".ply":
        return load_ply(path)
    raise ValueError(f"unsupported mesh format: {path.name}")


def load_obj(path) -> TriangleMesh:
    vertices = []
    faces = []
    with open(path, "r") as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                # entries may be v, v/vt, v/vt/vn or v//vn; only v is used
                idx = []
                for entry in parts[1:]:
                    raw = int(entry.split("/")[0])
                    idx.append(raw - 1 if raw > 0 else len(vertices) + raw)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not vertices:
        raise ValueError(f"no vertices in {path}")
    return TriangleMesh(np.array(vertices), np.array(faces, dtype=np.int64).reshape(-1, 3))


def save_obj(path, mesh: TriangleMesh) -> None:
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def load_ply(path) -> TriangleMesh:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"ply":
            raise ValueError(f"{path} is not a PLY file")
        fmt = None
        n_vertices = n_faces = 0
        vertex_props = []
        current_element = None
        face_count_type = face_index_type = None
        while True:
            line = fh.readline()
            if not line:
                raise ValueError("unexpected end of PLY header")
            tokens = line.decode("ascii").split()
            if not tokens:
                continue
            if tokens[0] == "format":
                fmt = tokens[1]
            elif tokens[0] == "element":
                current_element = tokens[1]
                if current_element == "vertex":
                    n_vertices = int(tokens[2])
                elif current_element == "face":
                    n_faces = int(tokens[2])
            elif tokens[0] == "property":
                if current_element == "vertex":
                    vertex_props.append((tokens[1], tokens[2]))
                elif current_element == "face" and tokens[1] == "list":
                    face_count_type, face_index_type = tokens[2], tokens[3]
            elif tokens[0] == "end_header":
                break
        if fmt != "binary_little_endian":
            raise ValueError(f"unsupported PLY format {fmt!r}; need binary_little_endian")

        type_map = {
            "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
            "uchar": "u1", "uint8": "u1", "char": "i1", "int8": "i1",
            "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
            "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
        }
        vdtype = np.dtype([(name, "<" + type_map[t]) for t, name in vertex_props])
        raw = fh.read(n_vertices * vdtype.itemsize)
        if len(raw) != n_vertices * vdtype.itemsize:
            raise ValueError("truncated PLY vertex data")
        vdata = np.frombuffer(raw, dtype=vdtype)
        vertices = np.stack(
            [vdata["x"], vdata["y"], vdata["z"]], axis=-1
        ).astype(np.float64)

        count_size = np.dtype(type_map[face_count_type]).itemsize if face_count_type else 1
        index_dt = np.dtype("<" + type_map[face_index_type]) if face_index_type else np.dtype("<i4")
        faces = []
        for _ in range(n_faces):
            raw = fh.read(count_size)
            if len(raw) != count_size:
                raise ValueError("truncated PLY face data")
            k = int.from_bytes(raw, "little")
            idx = np.frombuffer(fh.read(k * index_dt.itemsize), dtype=index_dt)
            for j in range(1, k - 1):
                faces.append([idx[0], idx[j], idx[j + 1]])
    return TriangleMesh(vertices, np.array(faces, dtype=np.int64).reshape(-1, 3))


def save_ply(path, mesh: TriangleMesh) -> None:
    header = "\n".join(
        [
            "ply",
            "format binary_little_endian 1.0",
            f"element vertex {len(mesh.vertices)}",
            "property float x",
            "property float y",
            "property float z",
            f"element face {len(mesh.faces)}",
            "property list uchar int vertex_indices",
            "end_header",
        ]
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + b"\n")
        fh.write(mesh.vertices.astype("<f4").tobytes())
        for f in mesh.faces:
            fh.write(struct.pack("<B3i", 3, int(f[0]), int(f[1]), int(f[2])))
