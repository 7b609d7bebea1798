"""
Pinhole projection and SE(3) pose arithmetic
============================================

Round-trips a pixel through unproject/project, composes relative
transforms between camera poses, and measures pose distances with the
SE(3) geodesic used by the spatial selection policy.
"""

import numpy as np

import sparsewarp as sw

k = sw.Intrinsics(fx=500.0, fy=500.0, cx=319.5, cy=239.5, width=640, height=480)

# A pixel with a depth is a 3D point in the camera frame; projecting it
# back recovers the pixel and the depth.
p = sw.unproject((412.3, 77.9), 2.5, k)
(u, v), z = sw.project(p, k)
print(f"unproject -> {p}")
print(f"project   -> ({u:.12f}, {v:.12f}) at depth {z}")

# Camera poses are camera-to-world. relative_transform(a, b) maps points
# from a's camera frame into b's, and composes along pose chains.
rng = np.random.default_rng(3)
poses = [
    sw.PoseSE3(
        rotation=sw.rotation_about_axis(rng.normal(size=3), rng.uniform(0, 2)),
        translation=rng.uniform(-2, 2, size=3),
    )
    for _ in range(3)
]
a, b, c = poses
ab, bc, ac = (sw.relative_transform(x, y) for x, y in ((a, b), (b, c), (a, c)))
composed_r = bc.rotation @ ab.rotation
composed_t = bc.rotation @ ab.translation + bc.translation
print(f"composition residual: rotation {np.abs(composed_r - ac.rotation).max():.2e}, "
      f"translation {np.abs(composed_t - ac.translation).max():.2e}")

# The geodesic distance blends rotation angle and translation through the
# length scale rho; rho=1 weighs one radian like one meter.
d = sw.se3_geodesic(a, b, rho=1.0)
angle = np.degrees(sw.so3_log_angle(ab.rotation))
print(f"pose distance d(a,b) = {d:.4f}  (rotation {angle:.1f} deg, "
      f"baseline {np.linalg.norm(ab.translation):.3f} m)")
