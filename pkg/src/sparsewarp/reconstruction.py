"""Point-cloud reconstruction from RGBD sessions.

Frames unproject to world-frame clouds which are merged either by plain
concatenation, by voxel fusion (one centroid per occupied voxel), or by voxel
fusion with incremental ICP alignment of each new cloud against the running
model. Voxel fusion stands in for a full meshing step with a surface density
bound: every fused point is within half a voxel diagonal of an observed
point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Intrinsics, RelativeTransform, so3_log_angle
from .session import Frame, PointCloud, Session

logger = logging.getLogger(__name__)

DEFAULT_VOXEL_SIZE = 0.02


@dataclass(frozen=True)
class IcpParams:
    max_iterations: int = 50
    max_correspondence_distance: float = 0.1
    convergence_translation: float = 1e-6
    convergence_rotation: float = 1e-6

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.max_correspondence_distance > 0:
            raise ValueError("max_correspondence_distance must be positive")


@dataclass(frozen=True)
class IcpResult:
    transform: RelativeTransform
    rmse: float
    iterations: int
    n_correspondences: int


class DegenerateRegistrationError(Exception):
    """ICP could not find enough gated correspondences to constrain a pose."""


@dataclass(frozen=True)
class Concat:
    """Merge by concatenation in input order."""


@dataclass(frozen=True)
class Fused:
    """Merge by voxel fusion: points bucketed by floor(p / voxel_size), one
    centroid per occupied voxel, emitted in sorted voxel-key order."""

    voxel_size: float = DEFAULT_VOXEL_SIZE

    def __post_init__(self) -> None:
        if not self.voxel_size > 0:
            raise ValueError("voxel_size must be positive")


@dataclass(frozen=True)
class FusedIcp:
    """Voxel fusion with each incoming cloud ICP-aligned to the running model."""

    voxel_size: float = DEFAULT_VOXEL_SIZE
    icp: IcpParams = field(default_factory=IcpParams)

    def __post_init__(self) -> None:
        if not self.voxel_size > 0:
            raise ValueError("voxel_size must be positive")


MergeMethod = Concat | Fused | FusedIcp


def frame_to_pointcloud(
    frame: Frame,
    k: Intrinsics,
    depth_source: str = "gt",
    pixel_stride: int = 1,
) -> PointCloud:
    """Unproject a frame's valid depth to a world-frame colored cloud.

    Pixels are visited on a row-major grid subsampled by pixel_stride; point
    order is deterministic.
    """
    if pixel_stride < 1:
        raise ValueError(f"pixel_stride must be >= 1, got {pixel_stride}")
    if depth_source not in frame.depth:
        raise ValueError(
            f"frame {frame.index} has no depth source {depth_source!r}; "
            f"available: {sorted(frame.depth)}"
        )
    depth = frame.depth[depth_source][::pixel_stride, ::pixel_stride]
    rgb = frame.rgb[::pixel_stride, ::pixel_stride]
    vs, us = np.nonzero(depth > 0)
    d = depth[vs, us]
    cam = np.empty((d.size, 3), dtype=np.float64)
    cam[:, 0] = d * (us * pixel_stride - k.cx) / k.fx
    cam[:, 1] = d * (vs * pixel_stride - k.cy) / k.fy
    cam[:, 2] = d
    world = cam @ frame.pose.rotation.T + frame.pose.translation
    return PointCloud(points=world, colors=rgb[vs, us].copy())


def voxel_downsample(cloud: PointCloud, voxel_size: float) -> PointCloud:
    """One centroid per occupied voxel; output ordered by sorted voxel key."""
    if not voxel_size > 0:
        raise ValueError("voxel_size must be positive")
    pts = cloud.points
    if pts.shape[0] == 0:
        return PointCloud(points=pts.copy(), colors=None if cloud.colors is None else cloud.colors.copy())
    keys = np.floor(pts / voxel_size).astype(np.int64)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
    keys = keys[order]
    pts = pts[order]
    boundaries = np.empty(keys.shape[0], dtype=bool)
    boundaries[0] = True
    boundaries[1:] = (keys[1:] != keys[:-1]).any(axis=1)
    starts = np.nonzero(boundaries)[0]
    counts = np.diff(np.append(starts, keys.shape[0]))
    sums = np.add.reduceat(pts, starts, axis=0)
    centroids = sums / counts[:, None]
    colors = None
    if cloud.colors is not None:
        csums = np.add.reduceat(cloud.colors[order].astype(np.float64), starts, axis=0)
        colors = np.clip(np.rint(csums / counts[:, None]), 0, 255).astype(np.uint8)
    return PointCloud(points=centroids, colors=colors)


def _gated_correspondences(
    src: np.ndarray, tree: cKDTree, dst: np.ndarray, max_dist: float
) -> tuple[np.ndarray, np.ndarray]:
    dist, idx = tree.query(src, k=1)
    keep = dist <= max_dist
    return src[keep], dst[idx[keep]]


def _best_rigid(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form least-squares rigid transform src -> dst (SVD, reflection-safe)."""
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    h = (src - cs).T @ (dst - cd)
    u, _s, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    diag = np.diag([1.0, 1.0, d])
    r = vt.T @ diag @ u.T
    t = cd - r @ cs
    return r, t


def icp_align(
    src: PointCloud | np.ndarray,
    dst: PointCloud | np.ndarray,
    params: IcpParams = IcpParams(),
    init: RelativeTransform | None = None,
) -> IcpResult:
    """Point-to-point ICP aligning src onto dst.

    Correspondences are nearest neighbors within max_correspondence_distance;
    each iteration solves the closed-form SVD update and the loop stops when
    the incremental motion drops below the convergence thresholds or the
    iteration budget runs out.

    Returns:
        IcpResult whose transform maps src coordinates into dst coordinates.
        Raises DegenerateRegistrationError when fewer than 3 correspondences
        survive the gate.
    """
    src_pts = np.asarray(getattr(src, "points", src), dtype=np.float64)
    dst_pts = np.asarray(getattr(dst, "points", dst), dtype=np.float64)
    for name, arr in (("src", src_pts), ("dst", dst_pts)):
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise ValueError(f"{name} must be a nonempty (N, 3) array, got {arr.shape}")

    r_total = init.rotation.copy() if init is not None else np.eye(3)
    t_total = init.translation.copy() if init is not None else np.zeros(3)
    tree = cKDTree(dst_pts)
    moved = src_pts @ r_total.T + t_total
    rmse = float("inf")
    n_corr = 0
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        s, d = _gated_correspondences(moved, tree, dst_pts, params.max_correspondence_distance)
        n_corr = s.shape[0]
        if n_corr < 3:
            raise DegenerateRegistrationError(
                f"only {n_corr} correspondences within "
                f"{params.max_correspondence_distance} m at iteration {iterations}"
            )
        r_step, t_step = _best_rigid(s, d)
        r_total = r_step @ r_total
        t_total = r_step @ t_total + t_step
        moved = src_pts @ r_total.T + t_total
        resid = s @ r_step.T + t_step - d
        rmse = float(np.sqrt((resid * resid).sum() / n_corr))
        if (
            np.linalg.norm(t_step) < params.convergence_translation
            and so3_log_angle(r_step) < params.convergence_rotation
        ):
            break
    return IcpResult(
        transform=RelativeTransform(r_total, t_total),
        rmse=rmse,
        iterations=iterations,
        n_correspondences=n_corr,
    )


def _concat(clouds: list[PointCloud]) -> PointCloud:
    pts = np.vstack([c.points for c in clouds])
    colors = None
    if all(c.colors is not None for c in clouds):
        colors = np.vstack([c.colors for c in clouds])
    return PointCloud(points=pts, colors=colors)


def merge_clouds(clouds: list[PointCloud], method: MergeMethod = Fused()) -> PointCloud:
    """Merge clouds per the chosen method; see Concat, Fused and FusedIcp."""
    if not clouds:
        raise ValueError("no clouds to merge")
    if isinstance(method, Concat):
        return _concat(clouds)
    if isinstance(method, Fused):
        return voxel_downsample(_concat(clouds), method.voxel_size)
    if isinstance(method, FusedIcp):
        running = voxel_downsample(clouds[0], method.voxel_size)
        for i, cloud in enumerate(clouds[1:], start=1):
            try:
                result = icp_align(cloud, running, method.icp)
            except DegenerateRegistrationError as e:
                logger.warning("fused_icp: skipping cloud %d (%s)", i, e)
                continue
            aligned = PointCloud(points=result.transform.apply(cloud.points), colors=cloud.colors)
            running = voxel_downsample(_concat([running, aligned]), method.voxel_size)
        return running
    raise TypeError(f"unknown merge method {type(method).__name__}")


def reconstruct_session(
    session: Session,
    depth_source: str = "gt",
    frame_stride: int = 1,
    method: MergeMethod = Fused(),
    pixel_stride: int = 1,
) -> PointCloud:
    """Reconstruct a world-frame cloud from every frame_stride-th frame."""
    if frame_stride < 1:
        raise ValueError(f"frame_stride must be >= 1, got {frame_stride}")
    clouds = [
        frame_to_pointcloud(f, session.intrinsics, depth_source, pixel_stride)
        for f in session.frames[::frame_stride]
    ]
    clouds = [c for c in clouds if len(c)]
    if not clouds:
        raise ValueError("no valid depth anywhere in the selected frames")
    return merge_clouds(clouds, method)
