"""Shared fixtures: JIT warmup and the synthetic sessions used across suites.

The sessions are deliberately few and session-scoped; rendering them once
keeps the full run fast while letting the unit suites and the acceptance
suite exercise identical data.
"""

import math

import numpy as np
import pytest

import sparsewarp as sw
from sparsewarp import raster


@pytest.fixture(scope="session", autouse=True)
def warm_rasterizer():
    # First rasterizer call pays JIT compilation; do it before any timed test.
    raster.warmup()


HALL_EXTENTS = (8.0, 5.5, 4.5)
HALL_K = sw.Intrinsics(fx=160.0, fy=160.0, cx=79.5, cy=59.5, width=160, height=120)

ROOM_EXTENTS = (4.0, 3.0, 2.5)
ROOM_K = sw.Intrinsics(fx=110.0, fy=110.0, cx=79.5, cy=59.5, width=160, height=120)

RECON_EXTENTS = (3.0, 2.4, 2.2)
RECON_K = sw.Intrinsics(fx=100.0, fy=100.0, cx=79.5, cy=59.5, width=160, height=120)

NOISE_SIGMA = 0.02
DROPOUT = 0.10


def build_dolly_session() -> sw.Session:
    """Fronto-parallel approach toward a wall, 0.05 m/frame, 61 frames.

    Every frame sees only the facing wall, so all mesh triangle areas are
    equal and the area filter keeps everything; warp quality then measures
    pure reprojection/resampling error. Color is supersampled so the renders
    are band-limited the same way the warp interpolation is.
    """
    start = sw.pose_looking((4.0, 2.75, 2.25), (1.0, 0.0, 0.0))
    traj = sw.LinearTrajectory(
        start=start, direction=(1.0, 0.0, 0.0), velocity=0.05, n_frames=61
    )
    return sw.generate_session(
        sw.BoxScene(extents=HALL_EXTENTS),
        traj,
        HALL_K,
        noise_sigma=NOISE_SIGMA,
        dropout=DROPOUT,
        seed=7,
        supersample=4,
    )


def build_walk_session() -> sw.Session:
    """Oblique 45-degree walk along a wall, 0.08 m/frame, 61 frames.

    New wall content enters the view every frame, so warped overlap decays
    strictly with frame gap over 1..50.
    """
    f = math.sqrt(0.5)
    start = sw.pose_looking((6.0, 0.35, 2.25), (f, f, 0.0))
    traj = sw.LinearTrajectory(
        start=start, direction=(0.0, 1.0, 0.0), velocity=0.08, n_frames=61
    )
    return sw.generate_session(sw.BoxScene(extents=HALL_EXTENTS), traj, HALL_K, seed=7)


def build_policy_session() -> sw.Session:
    """Constant-velocity approach: 0.05 m/frame toward a wall 3 m away, 60 fps."""
    start = sw.pose_looking((1.0, 1.5, 1.25), (1.0, 0.0, 0.0))
    traj = sw.LinearTrajectory(
        start=start, direction=(1.0, 0.0, 0.0), velocity=0.05, n_frames=51
    )
    return sw.generate_session(sw.BoxScene(extents=ROOM_EXTENTS), traj, ROOM_K, seed=3)


def build_orbit_session(n_frames: int = 100) -> sw.Session:
    """Orbiting view inside the default room; generic varied geometry."""
    traj = sw.OrbitTrajectory(
        center=(2.0, 1.5, 1.25),
        radius=0.8,
        angular_rate=2.0 * math.pi / n_frames,
        n_frames=n_frames,
        pitch=0.2,
    )
    return sw.generate_session(sw.BoxScene(extents=ROOM_EXTENTS), traj, ROOM_K, seed=11)


def recon_poses() -> list[sw.PoseSE3]:
    """Eleven poses that jointly cover all six faces of RECON_EXTENTS.

    Six face-on views (camera 0.1 m from the opposite wall) each cover one
    entire face fronto-parallel; five oblique views add redundant texture.
    Eleven is prime, so cycling the list stays aligned with no stride in
    {1, 10, 20, ..., 100}: every stride visits every pose.
    """
    ex, ey, ez = RECON_EXTENTS
    cx_, cy_, cz_ = ex / 2, ey / 2, ez / 2
    poses = [
        sw.pose_looking((0.1, cy_, cz_), (1.0, 0.0, 0.0)),
        sw.pose_looking((ex - 0.1, cy_, cz_), (-1.0, 0.0, 0.0)),
        sw.pose_looking((cx_, 0.1, cz_), (0.0, 1.0, 0.0)),
        sw.pose_looking((cx_, ey - 0.1, cz_), (0.0, -1.0, 0.0)),
        sw.pose_looking((cx_, cy_, 0.1), (0.0, 0.0, 1.0), up_hint=(1.0, 0.0, 0.0)),
        sw.pose_looking((cx_, cy_, ez - 0.1), (0.0, 0.0, -1.0), up_hint=(1.0, 0.0, 0.0)),
    ]
    for j in range(5):
        ang = 2.0 * math.pi * j / 5
        look = (math.cos(ang), math.sin(ang), 0.25 if j % 2 else -0.25)
        poses.append(sw.pose_looking((cx_ + 0.2, cy_ - 0.15, cz_ + 0.1), look))
    return poses


def build_recon_session(n_frames: int = 1001) -> sw.Session:
    poses = recon_poses()
    cycle = tuple(poses[i % len(poses)] for i in range(n_frames))
    traj = sw.ScriptedTrajectory(poses=cycle)
    return sw.generate_session(
        sw.BoxScene(extents=RECON_EXTENTS),
        traj,
        RECON_K,
        noise_sigma=NOISE_SIGMA,
        dropout=DROPOUT,
        seed=19,
    )


@pytest.fixture(scope="session")
def dolly_session() -> sw.Session:
    return build_dolly_session()


@pytest.fixture(scope="session")
def walk_session() -> sw.Session:
    return build_walk_session()


@pytest.fixture(scope="session")
def policy_session() -> sw.Session:
    return build_policy_session()


@pytest.fixture(scope="session")
def orbit_session() -> sw.Session:
    return build_orbit_session()


@pytest.fixture(scope="session")
def recon_session() -> sw.Session:
    return build_recon_session()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
