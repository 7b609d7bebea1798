"""Synthetic box-room scenes with analytic ray-cast rendering.

The scene is the interior of an axis-aligned box. Each of the six faces has a
procedural texture: a two-color checker plus deterministic hash noise, so
rendered views carry enough high-frequency content for SSIM to discriminate
between good and bad warps. Rendering is exact ray casting (slab method), so
depth maps are analytic z-depth with no rasterization error, usable as ground
truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import Intrinsics, PoseSE3, pose_looking, rotation_about_axis
from .session import Frame, Session

FACE_NAMES = ("x-", "x+", "y-", "y+", "z-", "z+")

NOISY_SOURCE = "noisy"
GT_SOURCE = "gt"


@dataclass(frozen=True)
class WallTexture:
    """Checker of two RGB colors plus hash noise on a fixed world-space grid."""

    checker_size: float = 0.25
    color_a: tuple[int, int, int] = (200, 60, 60)
    color_b: tuple[int, int, int] = (240, 230, 210)
    noise_amplitude: float = 18.0
    noise_scale: float = 0.25

    def __post_init__(self) -> None:
        if not (self.checker_size > 0 and self.noise_scale > 0):
            raise ValueError("checker_size and noise_scale must be positive")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be nonnegative")


def _default_textures() -> dict[str, WallTexture]:
    palette = {
        "x-": ((196, 78, 62), (242, 230, 212)),
        "x+": ((64, 118, 188), (236, 240, 226)),
        "y-": ((92, 160, 84), (244, 238, 206)),
        "y+": ((182, 142, 62), (230, 224, 238)),
        "z-": ((110, 96, 88), (214, 206, 196)),
        "z+": ((150, 120, 170), (238, 236, 230)),
    }
    return {name: WallTexture(color_a=a, color_b=b) for name, (a, b) in palette.items()}


@dataclass(frozen=True)
class BoxScene:
    """Axis-aligned box interior spanning origin .. origin + extents."""

    extents: tuple[float, float, float] = (4.0, 3.0, 2.5)
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    textures: dict[str, WallTexture] = field(default_factory=_default_textures)

    def __post_init__(self) -> None:
        if len(self.extents) != 3 or any(not e > 0 for e in self.extents):
            raise ValueError(f"extents must be three positive sizes, got {self.extents}")
        missing = [n for n in FACE_NAMES if n not in self.textures]
        if missing:
            raise ValueError(f"textures missing for faces {missing}")

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=np.float64)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + np.asarray(self.extents, dtype=np.float64)

    def contains(self, point: Sequence[float], margin: float = 0.0) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(((p > self.lo + margin) & (p < self.hi - margin)).all())


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _hash_noise(face_id: int, ip: np.ndarray, iq: np.ndarray) -> np.ndarray:
    """Deterministic noise in [-1, 1) keyed by face and integer texel coords."""
    a = ip.astype(np.int64).astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
    b = iq.astype(np.int64).astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
    z = _splitmix64(a ^ (b + np.uint64(face_id * 0x165667B19E3779F9)))
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53) * 2.0 - 1.0


_FACE_PLANE_AXES = {0: (1, 2), 1: (0, 2), 2: (0, 1)}


def _face_color(scene: BoxScene, face: int, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Texture color for face-local plane coordinates (p, q), shape (..., 3) float."""
    tex = scene.textures[FACE_NAMES[face]]
    cs = tex.checker_size
    parity = (np.floor(p / cs) + np.floor(q / cs)).astype(np.int64) & 1
    ca = np.asarray(tex.color_a, dtype=np.float64)
    cb = np.asarray(tex.color_b, dtype=np.float64)
    rgb = np.where(parity[..., None] == 0, ca, cb)
    if tex.noise_amplitude > 0:
        ns = tex.noise_scale
        n = _hash_noise(face, np.floor(p / ns), np.floor(q / ns))
        rgb = rgb + tex.noise_amplitude * n[..., None]
    return np.clip(rgb, 0.0, 255.0)


def render_frame(
    scene: BoxScene, pose: PoseSE3, k: Intrinsics, supersample: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Ray-cast one view from inside the box.

    Args:
        scene: the box scene; the camera position must be strictly inside.
        pose: camera-to-world pose.
        k: intrinsics.
        supersample: color antialiasing factor; rgb is the mean over an
            s-by-s ray grid per pixel. Depth always comes from the single
            center ray, so it stays exact z-depth regardless of s.

    Returns:
        (rgb uint8 (H, W, 3), depth float64 (H, W)) where depth is z-depth in
        meters. Every pixel is valid because the box is closed.
    """
    ss = int(supersample)
    if ss < 1:
        raise ValueError(f"supersample must be a positive integer, got {supersample}")
    if ss > 1:
        k_ss = Intrinsics(
            fx=k.fx * ss,
            fy=k.fy * ss,
            cx=k.cx * ss + (ss - 1) / 2.0,
            cy=k.cy * ss + (ss - 1) / 2.0,
            width=k.width * ss,
            height=k.height * ss,
        )
        rgb_ss, _ = render_frame(scene, pose, k_ss)
        _, depth = render_frame(scene, pose, k)
        fine = rgb_ss.astype(np.float64).reshape(k.height, ss, k.width, ss, 3)
        return np.rint(fine.mean(axis=(1, 3))).astype(np.uint8), depth
    o = pose.translation
    if not scene.contains(o):
        raise ValueError(f"camera position {o} is not strictly inside the box")
    h, w = k.height, k.width
    u = np.arange(w, dtype=np.float64)
    v = np.arange(h, dtype=np.float64)
    xs = (u - k.cx) / k.fx
    ys = (v - k.cy) / k.fy
    dirs_cam = np.empty((h, w, 3), dtype=np.float64)
    dirs_cam[..., 0] = xs[None, :]
    dirs_cam[..., 1] = ys[:, None]
    dirs_cam[..., 2] = 1.0
    dirs = dirs_cam @ pose.rotation.T

    # All intersection math runs in scene-local coordinates (origin at lo) so
    # that translating scene and camera together is an exact no-op.
    o_l = o - scene.lo
    ext = scene.hi - scene.lo
    t_exit = np.full((h, w), np.inf)
    axis_hit = np.zeros((h, w), dtype=np.int64)
    pos_hit = np.zeros((h, w), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for a in range(3):
            da = dirs[..., a]
            ta = np.where(da > 0, (ext[a] - o_l[a]) / da, np.where(da < 0, (0.0 - o_l[a]) / da, np.inf))
            closer = ta < t_exit
            t_exit = np.where(closer, ta, t_exit)
            axis_hit = np.where(closer, a, axis_hit)
            pos_hit = np.where(closer, da > 0, pos_hit)

    # dirs_cam has z == 1, so the exit parameter is exactly the z-depth.
    depth = t_exit
    hit = o_l[None, None, :] + t_exit[..., None] * dirs

    rgb = np.zeros((h, w, 3), dtype=np.float64)
    for a in range(3):
        a1, a2 = _FACE_PLANE_AXES[a]
        for pos in (False, True):
            sel = (axis_hit == a) & (pos_hit == pos)
            if not sel.any():
                continue
            face = a * 2 + int(pos)
            p = hit[..., a1][sel]
            q = hit[..., a2][sel]
            rgb[sel] = _face_color(scene, face, p, q)
    return np.rint(rgb).astype(np.uint8), depth


@dataclass(frozen=True)
class LinearTrajectory:
    """Constant-velocity translation with a fixed orientation."""

    start: PoseSE3
    direction: tuple[float, float, float]
    velocity: float
    n_frames: int


@dataclass(frozen=True)
class OrbitTrajectory:
    """Outward-looking camera on a horizontal circle around `center`."""

    center: tuple[float, float, float]
    radius: float
    angular_rate: float
    n_frames: int
    phase: float = 0.0
    pitch: float = 0.0


@dataclass(frozen=True)
class ScriptedTrajectory:
    poses: tuple[PoseSE3, ...]

    @property
    def n_frames(self) -> int:
        return len(self.poses)


Trajectory = LinearTrajectory | OrbitTrajectory | ScriptedTrajectory


def trajectory_poses(traj: Trajectory) -> list[PoseSE3]:
    if isinstance(traj, ScriptedTrajectory):
        return list(traj.poses)
    if isinstance(traj, LinearTrajectory):
        d = np.asarray(traj.direction, dtype=np.float64)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("trajectory direction must be nonzero")
        d = d / n
        return [
            PoseSE3(traj.start.rotation, traj.start.translation + i * traj.velocity * d)
            for i in range(traj.n_frames)
        ]
    if isinstance(traj, OrbitTrajectory):
        c = np.asarray(traj.center, dtype=np.float64)
        poses = []
        for i in range(traj.n_frames):
            ang = traj.phase + i * traj.angular_rate
            radial = np.array([math.cos(ang), math.sin(ang), 0.0])
            pos = c + traj.radius * radial
            # positive pitch tilts the outward view upward
            forward = rotation_about_axis(np.cross(radial, [0.0, 0.0, 1.0]), traj.pitch) @ radial
            poses.append(pose_looking(pos, forward))
        return poses
    raise TypeError(f"unknown trajectory type {type(traj).__name__}")


def generate_session(
    scene: BoxScene,
    trajectory: Trajectory,
    k: Intrinsics,
    fps: float = 60.0,
    noise_sigma: float = 0.0,
    dropout: float = 0.0,
    seed: int = 0,
    supersample: int = 1,
) -> Session:
    """Render a session along a trajectory.

    Every frame gets a 'gt' depth source. When noise_sigma > 0 or dropout > 0 a
    degraded 'noisy' source is added: Gaussian z-noise of the given sigma plus
    a dropout fraction of pixels zeroed (invalid). The same arguments always
    produce bit-identical sessions.

    Args:
        scene: box scene to render.
        trajectory: camera path; all positions must stay inside the box.
        k: intrinsics.
        fps: nominal frame rate stored in the manifest.
        noise_sigma: depth noise sigma in meters for the 'noisy' source.
        dropout: fraction of 'noisy' pixels zeroed, in [0, 1).
        seed: base seed for the noise streams.
        supersample: color antialiasing factor passed to render_frame.
    """
    if not 0.0 <= dropout < 1.0:
        raise ValueError(f"dropout must be in [0, 1), got {dropout}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    poses = trajectory_poses(trajectory)
    if not poses:
        raise ValueError("trajectory has no frames")
    add_noisy = noise_sigma > 0 or dropout > 0
    frames = []
    for i, pose in enumerate(poses):
        rgb, depth = render_frame(scene, pose, k, supersample=supersample)
        sources = {GT_SOURCE: depth}
        if add_noisy:
            rng = np.random.default_rng([seed, i])
            noisy = depth.copy()
            if noise_sigma > 0:
                noisy = noisy + rng.normal(0.0, noise_sigma, size=noisy.shape)
                noisy = np.maximum(noisy, 0.001)
            if dropout > 0:
                noisy[rng.random(noisy.shape) < dropout] = 0.0
            sources[NOISY_SOURCE] = noisy
        frames.append(
            Frame(
                index=i,
                timestamp_us=round(i * 1_000_000.0 / fps),
                rgb=rgb,
                depth=sources,
                pose=pose,
            )
        )
    return Session(frames=frames, intrinsics=k, nominal_fps=fps)


def scene_ground_truth_cloud(scene: BoxScene, samples_per_m2: float = 2500.0):
    """Deterministic stratified sample of all six interior faces.

    The total point count equals round(total face area * samples_per_m2);
    per-face counts are apportioned by largest remainder. Points are stratum
    centers, exactly on their face plane.
    """
    from .session import PointCloud

    if not samples_per_m2 > 0:
        raise ValueError("samples_per_m2 must be positive")
    lo, hi = scene.lo, scene.hi
    ext = hi - lo
    faces = []
    for a in range(3):
        a1, a2 = _FACE_PLANE_AXES[a]
        area = ext[a1] * ext[a2]
        faces.append((a, False, a1, a2, area))
        faces.append((a, True, a1, a2, area))
    quotas = [f[4] * samples_per_m2 for f in faces]
    total = int(round(sum(quotas)))
    counts = [int(math.floor(q)) for q in quotas]
    extras = total - sum(counts)
    order = sorted(range(len(faces)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:extras]:
        counts[i] += 1

    chunks = []
    for (a, pos, a1, a2, _area), n in zip(faces, counts):
        if n == 0:
            continue
        l1, l2 = ext[a1], ext[a2]
        n1 = min(n, max(1, int(round(math.sqrt(n * l1 / l2)))))
        base, rem = divmod(n, n1)
        p_parts, q_parts = [], []
        for i in range(n1):
            cols = base + (1 if i < rem else 0)
            p_parts.append(np.full(cols, lo[a1] + (i + 0.5) * (l1 / n1)))
            q_parts.append(lo[a2] + (np.arange(cols) + 0.5) * (l2 / cols))
        pts = np.empty((n, 3), dtype=np.float64)
        pts[:, a] = hi[a] if pos else lo[a]
        pts[:, a1] = np.concatenate(p_parts)
        pts[:, a2] = np.concatenate(q_parts)
        chunks.append(pts)
    return PointCloud(np.vstack(chunks))


def translated(scene: BoxScene, delta: Sequence[float]) -> BoxScene:
    """The same scene shifted rigidly by `delta` (textures ride along)."""
    d = np.asarray(delta, dtype=np.float64)
    return replace(scene, origin=tuple(scene.lo + d))
