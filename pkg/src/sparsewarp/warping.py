"""Geometry-aware forward warping of RGBD frames to novel viewpoints.

A source frame's depth map is lifted to a per-pixel screen-space mesh (two
triangles per 2x2 pixel quad, fixed down-right diagonal split). Triangles
whose 3D area exceeds the per-frame area percentile are discarded: large
triangles bridge depth discontinuities and would smear foreground onto
background. The mesh is moved rigidly into the target camera and rasterized
with the deterministic software rasterizer. Valid pixels left without any
surviving triangle (isolated samples, or vertices whose every incident
triangle was filtered) are point-splatted so no valid sample is dropped;
this is what makes the identity warp reproduce the source exactly on its
valid pixels whatever the validity pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Intrinsics, PoseSE3, relative_transform
from .raster import DEFAULT_Z_NEAR, rasterize_arrays
from .session import Frame

DEFAULT_AREA_PERCENTILE = 95.0
# Comparisons against the percentile threshold get this relative slack so a
# constant-depth plane (all areas equal in exact math, ~1 ulp apart in floats)
# never loses triangles to rounding.
_AREA_RTOL = 1e-9


@dataclass(frozen=True)
class ScreenSpaceMesh:
    """Per-pixel surface mesh of one frame.

    vertices are camera-frame points, one per valid-depth pixel, in row-major
    pixel order; colors are the matching rgb samples as float64. triangles
    index vertices; areas are 3D triangle areas in m^2 (parallel to triangles).
    """

    vertices: np.ndarray
    colors: np.ndarray
    triangles: np.ndarray
    areas: np.ndarray
    width: int
    height: int

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


@dataclass(frozen=True)
class WarpResult:
    """Output of warping a frame to a target pose.

    valid_mask marks pixels covered by warped geometry; depth is interpolated
    view-space z in the target camera (0 where invalid); overlap_ratio is the
    covered fraction of all target pixels; n_source_valid is the source
    valid-depth pixel count, kept so callers can re-normalize.
    """

    rgb: np.ndarray
    depth: np.ndarray
    valid_mask: np.ndarray
    overlap_ratio: float
    n_source_valid: int


def nearest_rank_percentile(values: np.ndarray, percentile: float) -> float:
    """Nearest-rank percentile: smallest value with at least p% of mass at or below."""
    if not 0.0 < percentile <= 100.0:
        raise ValueError(f"percentile must be in (0, 100], got {percentile}")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("percentile of an empty set")
    rank = max(1, math.ceil(percentile / 100.0 * values.size))
    return float(np.partition(values, rank - 1)[rank - 1])


def build_screen_space_mesh(
    depth: np.ndarray,
    rgb: np.ndarray,
    k: Intrinsics,
    area_percentile: float = DEFAULT_AREA_PERCENTILE,
) -> ScreenSpaceMesh:
    """Lift a depth map to a camera-frame triangle mesh.

    Args:
        depth: (H, W) z-depth in meters, 0 = invalid.
        rgb: (H, W, 3) uint8 image aligned with the depth map.
        k: intrinsics matching the image size.
        area_percentile: per-frame percentile of 3D triangle areas above which
            triangles are discarded (nearest-rank; 100 disables the filter).

    Only 2x2 quads whose four corners all carry valid depth contribute
    triangles, so no triangle ever references an invalid vertex.
    """
    if not 0.0 < area_percentile <= 100.0:
        raise ValueError(f"area_percentile must be in (0, 100], got {area_percentile}")
    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != (k.height, k.width):
        raise ValueError(f"depth shape {depth.shape} does not match intrinsics {k.width}x{k.height}")
    if rgb.shape != (k.height, k.width, 3):
        raise ValueError(f"rgb shape {rgb.shape} does not match intrinsics {k.width}x{k.height}")

    valid = depth > 0
    vid = np.full(depth.shape, -1, dtype=np.int64)
    n_valid = int(valid.sum())
    vid[valid] = np.arange(n_valid, dtype=np.int64)

    vs, us = np.nonzero(valid)
    d = depth[vs, us]
    verts = np.empty((n_valid, 3), dtype=np.float64)
    verts[:, 0] = d * (us - k.cx) / k.fx
    verts[:, 1] = d * (vs - k.cy) / k.fy
    verts[:, 2] = d
    colors = np.asarray(rgb, dtype=np.float64)[vs, us]

    v00 = vid[:-1, :-1].reshape(-1)
    v10 = vid[:-1, 1:].reshape(-1)
    v01 = vid[1:, :-1].reshape(-1)
    v11 = vid[1:, 1:].reshape(-1)
    ok = (v00 >= 0) & (v10 >= 0) & (v01 >= 0) & (v11 >= 0)
    t1 = np.column_stack([v00[ok], v10[ok], v11[ok]])
    t2 = np.column_stack([v00[ok], v11[ok], v01[ok]])
    tris = np.stack([t1, t2], axis=1).reshape(-1, 3)

    if tris.shape[0]:
        a = verts[tris[:, 0]]
        e1 = verts[tris[:, 1]] - a
        e2 = verts[tris[:, 2]] - a
        areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
        threshold = nearest_rank_percentile(areas, area_percentile)
        keep = areas <= threshold * (1.0 + _AREA_RTOL)
        tris = tris[keep]
        areas = areas[keep]
    else:
        areas = np.zeros(0, dtype=np.float64)

    return ScreenSpaceMesh(
        vertices=verts,
        colors=colors,
        triangles=tris,
        areas=areas,
        width=k.width,
        height=k.height,
    )


def _splat_points(
    verts: np.ndarray,
    colors: np.ndarray,
    rgb: np.ndarray,
    depth: np.ndarray,
    valid: np.ndarray,
    k: Intrinsics,
    z_near: float,
) -> None:
    """Z-tested single-pixel splats into existing raster buffers, in place.

    Ties are broken like the rasterizer: nearer depth wins, first submission
    wins at equal depth, and existing triangle fragments (submitted earlier)
    beat splats at equal depth.
    """
    z = verts[:, 2]
    front = z > z_near
    if not front.any():
        return
    verts = verts[front]
    colors = colors[front]
    z = z[front]
    u = np.rint(verts[:, 0] / z * k.fx + k.cx).astype(np.int64)
    v = np.rint(verts[:, 1] / z * k.fy + k.cy).astype(np.int64)
    ok = (u >= 0) & (u < k.width) & (v >= 0) & (v < k.height)
    if not ok.any():
        return
    u, v, z, colors = u[ok], v[ok], z[ok], colors[ok]
    pix = v * k.width + u
    order = np.lexsort((np.arange(pix.size), z, pix))
    first = np.ones(pix.size, dtype=bool)
    first[1:] = pix[order][1:] != pix[order][:-1]
    sel = order[first]
    uu, vv, zz = u[sel], v[sel], z[sel]
    better = ~valid[vv, uu] | (zz < depth[vv, uu])
    uu, vv, zz = uu[better], vv[better], zz[better]
    rgb[vv, uu] = np.clip(np.rint(colors[sel][better]), 0, 255).astype(np.uint8)
    depth[vv, uu] = zz
    valid[vv, uu] = True


def rasterize(mesh: ScreenSpaceMesh, k: Intrinsics, z_near: float = DEFAULT_Z_NEAR) -> WarpResult:
    """Rasterize a mesh whose vertices are already in the target camera frame.

    Vertices not referenced by any triangle are point-splatted on top of the
    triangle pass so isolated valid samples still land in the target view.
    """
    rgb, depth, valid = rasterize_arrays(mesh.vertices, mesh.colors, mesh.triangles, k, z_near)
    if mesh.n_vertices:
        referenced = np.zeros(mesh.n_vertices, dtype=bool)
        if mesh.triangles.size:
            referenced[mesh.triangles.reshape(-1)] = True
        if not referenced.all():
            lone = ~referenced
            _splat_points(mesh.vertices[lone], mesh.colors[lone], rgb, depth, valid, k, z_near)
    covered = int(valid.sum())
    return WarpResult(
        rgb=rgb,
        depth=depth,
        valid_mask=valid,
        overlap_ratio=covered / (k.width * k.height),
        n_source_valid=mesh.n_vertices,
    )


def warp_frame(
    frame: Frame,
    depth_source: str,
    dst_pose: PoseSE3,
    k: Intrinsics,
    area_percentile: float = DEFAULT_AREA_PERCENTILE,
    z_near: float = DEFAULT_Z_NEAR,
) -> WarpResult:
    """Warp one frame's RGBD content into a target camera.

    Args:
        frame: source frame (rgb, named depth sources, pose).
        depth_source: which depth map drives the geometry.
        dst_pose: target camera-to-world pose.
        k: intrinsics (shared by source and target).
        area_percentile: discontinuity filter percentile, see
            build_screen_space_mesh.
        z_near: near-plane distance in meters for the target camera.

    Returns:
        WarpResult in the target view. With dst_pose equal to the source pose
        the warp reproduces the source frame on its valid pixels regardless of
        the validity pattern, up to rasterization rounding.
    """
    if depth_source not in frame.depth:
        raise ValueError(
            f"frame {frame.index} has no depth source {depth_source!r}; "
            f"available: {sorted(frame.depth)}"
        )
    mesh = build_screen_space_mesh(frame.depth[depth_source], frame.rgb, k, area_percentile)
    rel = relative_transform(frame.pose, dst_pose)
    verts_t = mesh.vertices @ rel.rotation.T + rel.translation
    return rasterize(replace(mesh, vertices=verts_t), k, z_near)


def overlap_ratio(
    frame: Frame,
    depth_source: str,
    dst_pose: PoseSE3,
    k: Intrinsics,
    area_percentile: float = DEFAULT_AREA_PERCENTILE,
) -> float:
    """Fraction of target pixels covered when warping `frame` to `dst_pose`."""
    return warp_frame(frame, depth_source, dst_pose, k, area_percentile).overlap_ratio
