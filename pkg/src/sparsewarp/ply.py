"""Minimal PLY reader/writer for point clouds and triangle meshes.

Supports ascii 1.0 and binary_little_endian 1.0. Coordinates are written as
double so a save/load round trip is lossless; colors as uchar red/green/blue.
Unknown scalar vertex properties are skipped on read.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .session import PointCloud, SurfaceMesh

_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


class MalformedPlyError(Exception):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def save_pointcloud_ply(cloud: PointCloud, path: str | Path, binary: bool = False) -> None:
    _save_ply(cloud, None, path, binary)


def save_mesh_ply(mesh: SurfaceMesh, path: str | Path, binary: bool = False) -> None:
    _save_ply(mesh.vertices, mesh.triangles, path, binary)


def _save_ply(cloud: PointCloud, faces: np.ndarray | None, path: str | Path, binary: bool) -> None:
    n = len(cloud)
    has_color = cloud.colors is not None
    header = ["ply"]
    header.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    header.append(f"element vertex {n}")
    header += ["property double x", "property double y", "property double z"]
    if has_color:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    if faces is not None:
        header.append(f"element face {faces.shape[0]}")
        header.append("property list uchar int vertex_indices")
    header.append("end_header")

    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
            if has_color:
                fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
            rec = np.zeros(n, dtype=np.dtype(fields))
            rec["x"], rec["y"], rec["z"] = cloud.points.T
            if has_color:
                rec["red"], rec["green"], rec["blue"] = cloud.colors.T
            fh.write(rec.tobytes())
            if faces is not None:
                frec = np.zeros(faces.shape[0], dtype=np.dtype([("n", "u1"), ("i", "<i4", (3,))]))
                frec["n"] = 3
                frec["i"] = faces.astype(np.int32)
                fh.write(frec.tobytes())
        else:
            lines = []
            for i in range(n):
                row = f"{_fmt(cloud.points[i, 0])} {_fmt(cloud.points[i, 1])} {_fmt(cloud.points[i, 2])}"
                if has_color:
                    c = cloud.colors[i]
                    row += f" {c[0]} {c[1]} {c[2]}"
                lines.append(row)
            if faces is not None:
                for f in faces:
                    lines.append(f"3 {f[0]} {f[1]} {f[2]}")
            fh.write(("\n".join(lines) + "\n").encode("ascii"))


def _parse_header(data: bytes) -> tuple[dict, int]:
    end = data.find(b"end_header")
    if end < 0:
        raise MalformedPlyError("no end_header")
    body_start = data.find(b"\n", end) + 1
    lines = data[:end].decode("ascii", errors="replace").splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MalformedPlyError("missing ply magic")
    fmt = None
    elements: list[dict] = []
    for ln in lines[1:]:
        parts = ln.strip().split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] not in ("ascii", "binary_little_endian"):
                raise MalformedPlyError(f"unsupported format {parts[1]!r}")
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append({"name": parts[1], "count": int(parts[2]), "props": []})
        elif parts[0] == "property":
            if not elements:
                raise MalformedPlyError("property before any element")
            if parts[1] == "list":
                elements[-1]["props"].append(("list", parts[2], parts[3], parts[4]))
            else:
                if parts[1] not in _TYPES:
                    raise MalformedPlyError(f"unknown property type {parts[1]!r}")
                elements[-1]["props"].append(("scalar", parts[1], parts[2]))
    if fmt is None:
        raise MalformedPlyError("missing format line")
    return {"format": fmt, "elements": elements}, body_start


def load_pointcloud_ply(path: str | Path) -> PointCloud:
    cloud, _ = _load_ply(path)
    return cloud


def load_mesh_ply(path: str | Path) -> SurfaceMesh:
    cloud, faces = _load_ply(path)
    if faces is None:
        faces = np.zeros((0, 3), dtype=np.int64)
    return SurfaceMesh(vertices=cloud, triangles=faces)


def _load_ply(path: str | Path) -> tuple[PointCloud, np.ndarray | None]:
    data = Path(path).read_bytes()
    header, off = _parse_header(data)
    vertex_el = next((e for e in header["elements"] if e["name"] == "vertex"), None)
    if vertex_el is None:
        raise MalformedPlyError("no vertex element")
    face_el = next((e for e in header["elements"] if e["name"] == "face"), None)

    if header["format"] == "ascii":
        text = data[off:].decode("ascii", errors="replace").split()
        pos = 0
        cols = [p for p in vertex_el["props"]]
        if any(p[0] == "list" for p in cols):
            raise MalformedPlyError("list property in vertex element is unsupported")
        names = [p[2] for p in cols]
        n = vertex_el["count"]
        need = n * len(cols)
        if len(text) - pos < need:
            raise MalformedPlyError("truncated vertex data")
        table = np.array(text[pos : pos + need], dtype=np.float64).reshape(n, len(cols))
        pos += need
        pts, colors = _extract_vertex(table, names)
        faces = None
        if face_el is not None:
            faces = np.zeros((face_el["count"], 3), dtype=np.int64)
            for i in range(face_el["count"]):
                if pos >= len(text):
                    raise MalformedPlyError("truncated face data")
                cnt = int(text[pos]); pos += 1
                if cnt != 3:
                    raise MalformedPlyError(f"only triangular faces supported, got {cnt}")
                faces[i] = [int(text[pos]), int(text[pos + 1]), int(text[pos + 2])]
                pos += 3
        return PointCloud(pts, colors), faces

    # binary little endian
    if any(p[0] == "list" for p in vertex_el["props"]):
        raise MalformedPlyError("list property in vertex element is unsupported")
    fields = [(p[2], "<" + _TYPES[p[1]]) for p in vertex_el["props"]]
    vdtype = np.dtype(fields)
    n = vertex_el["count"]
    if len(data) - off < vdtype.itemsize * n:
        raise MalformedPlyError("truncated vertex data")
    rec = np.frombuffer(data, dtype=vdtype, count=n, offset=off)
    off += vdtype.itemsize * n
    names = [p[2] for p in vertex_el["props"]]
    table = np.column_stack([rec[nm].astype(np.float64) for nm in names])
    pts, colors = _extract_vertex(table, names)
    faces = None
    if face_el is not None:
        props = face_el["props"]
        if len(props) != 1 or props[0][0] != "list":
            raise MalformedPlyError("face element must carry a single list property")
        cnt_t = "<" + _TYPES[props[0][1]]
        idx_t = "<" + _TYPES[props[0][2]]
        cnt_size = np.dtype(cnt_t).itemsize
        idx_size = np.dtype(idx_t).itemsize
        faces = np.zeros((face_el["count"], 3), dtype=np.int64)
        for i in range(face_el["count"]):
            if len(data) - off < cnt_size:
                raise MalformedPlyError("truncated face data")
            cnt = int(np.frombuffer(data, dtype=cnt_t, count=1, offset=off)[0])
            off += cnt_size
            if cnt != 3:
                raise MalformedPlyError(f"only triangular faces supported, got {cnt}")
            if len(data) - off < 3 * idx_size:
                raise MalformedPlyError("truncated face data")
            faces[i] = np.frombuffer(data, dtype=idx_t, count=3, offset=off).astype(np.int64)
            off += 3 * idx_size
    return PointCloud(pts, colors), faces


def _extract_vertex(table: np.ndarray, names: list[str]) -> tuple[np.ndarray, np.ndarray | None]:
    try:
        pts = np.column_stack([table[:, names.index(ax)] for ax in ("x", "y", "z")])
    except ValueError as e:
        raise MalformedPlyError("vertex element lacks x/y/z properties") from e
    colors = None
    if all(c in names for c in ("red", "green", "blue")):
        colors = np.column_stack(
            [table[:, names.index(c)] for c in ("red", "green", "blue")]
        ).astype(np.uint8)
    return pts, colors
