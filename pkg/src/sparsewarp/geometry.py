"""Pinhole camera model and SE(3) pose utilities.

Conventions used across the package:
  - Pixel origin is the top-left corner, pixel centers at integer coordinates,
    u to the right, v down.
  - Camera frame: x right, y down, z forward (optical axis). Depth values are
    z-depth, the distance along the optical axis, not the ray length.
  - Poses are camera-to-world: X_world = R @ X_cam + t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

ORTHONORMALITY_TOL = 1e-9


class PixelCoord(NamedTuple):
    """Continuous pixel coordinate (u right, v down)."""

    u: float
    v: float


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics with image size in pixels.

    Attributes:
        fx, fy: focal lengths in pixels (positive).
        cx, cy: principal point in pixel coordinates.
        width, height: image size in pixels (positive).
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside "
                f"{self.width}x{self.height} image"
            )

    @property
    def matrix(self) -> np.ndarray:
        """3x3 camera matrix K."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


def _as_rotation(r: np.ndarray, what: str) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"{what} rotation must be 3x3, got shape {r.shape}")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > ORTHONORMALITY_TOL:
        raise ValueError(f"{what} rotation is not orthonormal (max deviation {err:.3e})")
    det = np.linalg.det(r)
    if abs(det - 1.0) > ORTHONORMALITY_TOL:
        raise ValueError(f"{what} rotation has determinant {det!r}, expected +1")
    r = r.copy()
    r.flags.writeable = False
    return r


def _as_translation(t: np.ndarray, what: str) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (3,):
        raise ValueError(f"{what} translation must be a 3-vector, got shape {t.shape}")
    if not np.isfinite(t).all():
        raise ValueError(f"{what} translation must be finite")
    t = t.copy()
    t.flags.writeable = False
    return t


@dataclass(frozen=True)
class PoseSE3:
    """Camera-to-world rigid pose: X_world = rotation @ X_cam + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", _as_rotation(self.rotation, "pose"))
        object.__setattr__(self, "translation", _as_translation(self.translation, "pose"))

    @classmethod
    def identity(cls) -> "PoseSE3":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "PoseSE3":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError(f"pose matrix must be 4x4, got shape {m.shape}")
        return cls(m[:3, :3], m[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 camera-to-world matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map camera-frame points (..., 3) into the world frame."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation


@dataclass(frozen=True)
class RelativeTransform:
    """Rigid map from a source camera frame into a target camera frame."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", _as_rotation(self.rotation, "relative"))
        object.__setattr__(self, "translation", _as_translation(self.translation, "relative"))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map source-camera points (..., 3) into the target camera frame."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation


def unproject(p: Sequence[float], depth: float, k: Intrinsics) -> np.ndarray:
    """Lift a pixel with known z-depth to a camera-frame 3D point.

    Args:
        p: pixel coordinate (u, v).
        depth: z-depth in meters, must be positive.
        k: intrinsics.

    Returns:
        Camera-frame point [x, y, z] with z == depth.
    """
    if not depth > 0:
        raise ValueError(f"depth must be positive, got {depth}")
    u, v = float(p[0]), float(p[1])
    x = depth * (u - k.cx) / k.fx
    y = depth * (v - k.cy) / k.fy
    return np.array([x, y, depth])


def project(point: Sequence[float], k: Intrinsics) -> tuple[PixelCoord, float]:
    """Project a camera-frame point to continuous pixel coordinates.

    Args:
        point: camera-frame [x, y, z] with z > 0.
        k: intrinsics.

    Returns:
        (PixelCoord(u, v), z). Raises ValueError for z <= 0 (point at or
        behind the camera plane has no pinhole image).
    """
    x, y, z = (float(point[0]), float(point[1]), float(point[2]))
    if not z > 0:
        raise ValueError(f"cannot project point with non-positive depth z={z}")
    u = k.fx * (x / z) + k.cx
    v = k.fy * (y / z) + k.cy
    return PixelCoord(u, v), z


def relative_transform(src: PoseSE3, dst: PoseSE3) -> RelativeTransform:
    """Rigid transform taking src-camera coordinates to dst-camera coordinates.

    R = R_dst^T @ R_src and t = R_dst^T @ (t_src - t_dst), so that
    X_dst = R @ X_src + t for any point X expressed in each camera frame.
    """
    r = dst.rotation.T @ src.rotation
    t = dst.rotation.T @ (src.translation - dst.translation)
    return RelativeTransform(r, t)


def so3_log_angle(r: np.ndarray) -> float:
    """Rotation angle in radians of a rotation matrix, in [0, pi].

    atan2(||antisymmetric part||, (trace - 1) / 2) rather than a bare arccos:
    the cosine argument is clamped against floating-point drift, and the sine
    term keeps the result well-conditioned near 0 and pi (arccos alone has a
    ~1e-8 error floor at both ends).
    """
    r = np.asarray(r, dtype=np.float64)
    c = min(1.0, max(-1.0, (np.trace(r) - 1.0) / 2.0))
    s = 0.5 * math.sqrt(
        (r[2, 1] - r[1, 2]) ** 2 + (r[0, 2] - r[2, 0]) ** 2 + (r[1, 0] - r[0, 1]) ** 2
    )
    return math.atan2(s, c)


def se3_geodesic(a: PoseSE3, b: PoseSE3, rho: float = 1.0) -> float:
    """Pose distance sqrt(theta^2 + ||t_a - t_b||^2 / rho^2).

    theta is the relative rotation angle; rho (meters per radian, positive)
    sets the exchange rate between translation and rotation. The default of
    1.0 weighs 1 m like 1 rad.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    theta = so3_log_angle(a.rotation.T @ b.rotation)
    dt = a.translation - b.translation
    return float(np.sqrt(theta * theta + (dt @ dt) / (rho * rho)))


def rotation_about_axis(axis: Sequence[float], angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a rotation of `angle` radians about `axis`."""
    ax = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(ax)
    if n == 0:
        raise ValueError("rotation axis must be nonzero")
    x, y, z = ax / n
    kmat = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * kmat + (1.0 - np.cos(angle)) * (kmat @ kmat)


def pose_looking(
    position: Sequence[float],
    forward: Sequence[float],
    up_hint: Sequence[float] = (0.0, 0.0, 1.0),
) -> PoseSE3:
    """Camera-to-world pose at `position` with the optical axis along `forward`.

    The image right (camera x) is forward x up_hint and image down (camera y)
    completes the right-handed frame. Raises if forward and up_hint are
    parallel; pass a different hint for straight-up or straight-down views.
    """
    f = np.asarray(forward, dtype=np.float64)
    nf = np.linalg.norm(f)
    if nf == 0:
        raise ValueError("forward direction must be nonzero")
    f = f / nf
    right = np.cross(f, np.asarray(up_hint, dtype=np.float64))
    nr = np.linalg.norm(right)
    if nr < 1e-9:
        raise ValueError("forward is parallel to up_hint; supply a different up_hint")
    right = right / nr
    down = np.cross(f, right)
    r = np.column_stack([right, down, f])
    return PoseSE3(r, np.asarray(position, dtype=np.float64))
