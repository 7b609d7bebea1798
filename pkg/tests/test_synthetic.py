"""Analytic box renderer, trajectories, and ground-truth sampling."""

import math

import numpy as np
import pytest

import sparsewarp as sw
from sparsewarp.synthetic import scene_ground_truth_cloud, translated

K = sw.Intrinsics(fx=100.0, fy=100.0, cx=80.0, cy=60.0, width=160, height=120)
SMALL_K = sw.Intrinsics(fx=20.0, fy=20.0, cx=15.5, cy=11.5, width=32, height=24)


def brute_force_depth(scene, pose, k):
    """Per-pixel nearest axis-plane intersection, solved directly per plane."""
    o = pose.translation
    lo, hi = scene.lo, scene.hi
    depth = np.full((k.height, k.width), np.inf)
    for v in range(k.height):
        for u in range(k.width):
            d_cam = np.array([(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0])
            d = pose.rotation @ d_cam
            best = np.inf
            for a in range(3):
                for plane in (lo[a], hi[a]):
                    if d[a] == 0:
                        continue
                    t = (plane - o[a]) / d[a]
                    if t <= 0 or t >= best:
                        continue
                    p = o + t * d
                    others = [i for i in range(3) if i != a]
                    if all(lo[i] - 1e-12 <= p[i] <= hi[i] + 1e-12 for i in others):
                        best = t
            depth[v, u] = best
    return depth


def boundary_distance(scene, pts):
    """Distance from points inside the closed box to its surface."""
    lo, hi = scene.lo, scene.hi
    return np.minimum(pts - lo, hi - pts).min(axis=1)


class TestRenderFrame:
    def test_center_pixel_depth_is_exact_wall_distance(self):
        pose = sw.pose_looking((1.0, 1.5, 1.25), (1.0, 0.0, 0.0))
        _, depth = sw.render_frame(sw.BoxScene(), pose, K)
        assert depth[60, 80] == 3.0

    def test_depth_positive_and_within_diagonal(self):
        scene = sw.BoxScene()
        pose = sw.pose_looking((0.5, 0.4, 0.3), (1.0, 1.0, 1.0))
        _, depth = sw.render_frame(scene, pose, K)
        assert (depth > 0).all()
        assert depth.max() <= np.linalg.norm(scene.hi - scene.lo)

    def test_depth_matches_per_plane_closed_form(self):
        scene = sw.BoxScene()
        pose = sw.pose_looking((1.3, 1.1, 0.9), (1.0, -0.4, 0.2))
        _, depth = sw.render_frame(scene, pose, SMALL_K)
        expected = brute_force_depth(scene, pose, SMALL_K)
        assert np.abs(depth - expected).max() < 1e-12

    def test_unprojected_pixels_lie_on_box_surface(self):
        scene = sw.BoxScene()
        pose = sw.pose_looking((2.2, 1.0, 1.4), (-0.7, 0.5, -0.1))
        _, depth = sw.render_frame(scene, pose, K)
        vs, us = np.mgrid[0 : K.height, 0 : K.width]
        cam = np.stack(
            [
                depth * (us - K.cx) / K.fx,
                depth * (vs - K.cy) / K.fy,
                depth,
            ],
            axis=-1,
        )
        world = cam.reshape(-1, 3) @ pose.rotation.T + pose.translation
        assert np.abs(boundary_distance(scene, world)).max() <= 1e-9

    def test_translation_equivariance_is_bitwise(self):
        scene = sw.BoxScene()
        pose = sw.pose_looking((1.0, 1.5, 1.25), (0.6, 0.8, 0.0))
        rgb0, d0 = sw.render_frame(scene, pose, K)
        delta = np.array([128.0, 64.0, 32.0])
        moved_pose = sw.PoseSE3(pose.rotation, pose.translation + delta)
        rgb1, d1 = sw.render_frame(translated(scene, delta), moved_pose, K)
        assert np.array_equal(rgb0, rgb1)
        assert np.array_equal(d0, d1)

    def test_camera_outside_box_rejected(self):
        with pytest.raises(ValueError, match="inside"):
            sw.render_frame(sw.BoxScene(), sw.pose_looking((9.0, 1.0, 1.0), (1, 0, 0)), K)
        # on-face counts as outside: containment is strict
        with pytest.raises(ValueError, match="inside"):
            sw.render_frame(sw.BoxScene(), sw.pose_looking((0.0, 1.0, 1.0), (1, 0, 0)), K)

    def test_supersampled_color_keeps_exact_depth(self):
        scene = sw.BoxScene()
        pose = sw.pose_looking((1.0, 1.5, 1.25), (1.0, 0.2, 0.0))
        rgb1, d1 = sw.render_frame(scene, pose, SMALL_K)
        rgb4, d4 = sw.render_frame(scene, pose, SMALL_K, supersample=4)
        assert np.array_equal(d1, d4)
        assert rgb4.shape == rgb1.shape and rgb4.dtype == np.uint8
        assert not np.array_equal(rgb1, rgb4)

    def test_supersample_validation(self):
        pose = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        with pytest.raises(ValueError, match="supersample"):
            sw.render_frame(sw.BoxScene(), pose, SMALL_K, supersample=0)

    def test_textures_are_high_frequency(self):
        # Warp metrics need local contrast everywhere; a flat image would
        # saturate SSIM and hide geometry errors.
        pose = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        rgb, _ = sw.render_frame(sw.BoxScene(), pose, K)
        luma = rgb.astype(np.float64).mean(axis=2)
        local = np.abs(np.diff(luma, axis=1)).mean()
        assert local > 2.0


class TestTrajectories:
    def test_linear_has_constant_step_geodesic(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.05, n_frames=100)
        poses = sw.trajectory_poses(traj)
        assert len(poses) == 100
        for a, b in zip(poses, poses[1:]):
            assert abs(sw.se3_geodesic(a, b) - 0.05) < 1e-12

    def test_linear_normalizes_direction(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(2, 0, 0), velocity=0.1, n_frames=3)
        poses = sw.trajectory_poses(traj)
        assert np.allclose(poses[2].translation, [1.2, 1.5, 1.25], atol=1e-12)

    def test_zero_direction_rejected(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(0, 0, 0), velocity=0.1, n_frames=3)
        with pytest.raises(ValueError, match="direction"):
            sw.trajectory_poses(traj)

    def test_orbit_stays_on_circle_and_looks_outward(self):
        traj = sw.OrbitTrajectory(center=(2.0, 1.5, 1.25), radius=0.5, angular_rate=0.3, n_frames=8)
        poses = sw.trajectory_poses(traj)
        for i, p in enumerate(poses):
            radial = p.translation - np.array([2.0, 1.5, 1.25])
            assert abs(np.linalg.norm(radial) - 0.5) < 1e-12
            assert radial @ p.rotation[:, 2] > 0

    def test_scripted_passes_poses_through(self):
        a = sw.pose_looking((1, 1, 1), (1, 0, 0))
        b = sw.pose_looking((1, 2, 1), (0, 1, 0))
        traj = sw.ScriptedTrajectory(poses=(a, b))
        assert sw.trajectory_poses(traj) == [a, b]


class TestGenerateSession:
    def test_single_frame_session_is_valid(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.0, n_frames=1)
        s = sw.generate_session(sw.BoxScene(), traj, SMALL_K)
        assert len(s.frames) == 1
        assert s.depth_sources == ["gt"]

    def test_same_arguments_produce_bit_identical_sessions(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.05, n_frames=4)
        kw = dict(noise_sigma=0.02, dropout=0.1, seed=9)
        s1 = sw.generate_session(sw.BoxScene(), traj, SMALL_K, **kw)
        s2 = sw.generate_session(sw.BoxScene(), traj, SMALL_K, **kw)
        for f1, f2 in zip(s1.frames, s2.frames):
            assert np.array_equal(f1.rgb, f2.rgb)
            assert np.array_equal(f1.depth["gt"], f2.depth["gt"])
            assert np.array_equal(f1.depth["noisy"], f2.depth["noisy"])

    def test_degraded_source_only_added_when_requested(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.05, n_frames=2)
        clean = sw.generate_session(sw.BoxScene(), traj, SMALL_K, noise_sigma=0.0, dropout=0.0)
        assert clean.depth_sources == ["gt"]
        noisy = sw.generate_session(sw.BoxScene(), traj, SMALL_K, noise_sigma=0.02, dropout=0.1)
        assert noisy.depth_sources == ["gt", "noisy"]

    def test_degraded_source_statistics(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.05, n_frames=3)
        s = sw.generate_session(sw.BoxScene(), traj, K, noise_sigma=0.02, dropout=0.1, seed=5)
        for f in s.frames:
            gt, noisy = f.depth["gt"], f.depth["noisy"]
            frac_zero = (noisy == 0).mean()
            assert 0.07 < frac_zero < 0.13
            resid = (noisy - gt)[noisy > 0]
            assert 0.015 < resid.std() < 0.025
            assert (noisy >= 0).all()

    def test_timestamps_follow_fps(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.01, n_frames=4)
        s = sw.generate_session(sw.BoxScene(), traj, SMALL_K, fps=30.0)
        assert [f.timestamp_us for f in s.frames] == [0, 33333, 66667, 100000]

    def test_dropout_bounds_validated(self):
        start = sw.pose_looking((1.0, 1.5, 1.25), (1, 0, 0))
        traj = sw.LinearTrajectory(start=start, direction=(1, 0, 0), velocity=0.01, n_frames=2)
        with pytest.raises(ValueError, match="dropout"):
            sw.generate_session(sw.BoxScene(), traj, SMALL_K, dropout=1.0)
        with pytest.raises(ValueError, match="noise_sigma"):
            sw.generate_session(sw.BoxScene(), traj, SMALL_K, noise_sigma=-0.1)


class TestGroundTruthCloud:
    def test_count_equals_area_times_density(self):
        scene = sw.BoxScene(extents=(3.0, 2.4, 2.2))
        ex, ey, ez = 3.0, 2.4, 2.2
        area = 2 * (ex * ey + ex * ez + ey * ez)
        cloud = scene_ground_truth_cloud(scene, 2500.0)
        assert len(cloud) == round(area * 2500.0)

    def test_every_point_on_a_face_plane(self):
        scene = sw.BoxScene(extents=(3.0, 2.4, 2.2), origin=(1.0, -2.0, 0.5))
        cloud = scene_ground_truth_cloud(scene, 500.0)
        assert np.abs(boundary_distance(scene, cloud.points)).max() == 0.0
        inside = ((cloud.points >= scene.lo) & (cloud.points <= scene.hi)).all()
        assert inside

    def test_doubled_density_stays_within_stratum_diagonal(self):
        scene = sw.BoxScene(extents=(3.0, 2.4, 2.2))
        c1 = scene_ground_truth_cloud(scene, 2500.0)
        c2 = scene_ground_truth_cloud(scene, 5000.0)
        res = sw.hausdorff(c1, c2, sw.HausdorffParams(overlap_margin=1.0))
        assert res.distance <= math.sqrt(2.0 / 2500.0)

    def test_deterministic(self):
        scene = sw.BoxScene()
        a = scene_ground_truth_cloud(scene, 777.0)
        b = scene_ground_truth_cloud(scene, 777.0)
        assert np.array_equal(a.points, b.points)

    def test_density_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            scene_ground_truth_cloud(sw.BoxScene(), 0.0)


class TestBoxScene:
    def test_extents_validated(self):
        with pytest.raises(ValueError):
            sw.BoxScene(extents=(0.0, 1.0, 1.0))

    def test_contains_is_strict(self):
        scene = sw.BoxScene()
        assert scene.contains((2.0, 1.5, 1.25))
        assert not scene.contains((0.0, 1.5, 1.25))
        assert not scene.contains((2.0, 1.5, 2.5))

    def test_contains_margin(self):
        scene = sw.BoxScene()
        assert not scene.contains((0.05, 1.5, 1.25), margin=0.1)
        assert scene.contains((0.2, 1.5, 1.25), margin=0.1)
