"""Deterministic triangle rasterizer: coverage rules, z-order, clipping."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from sparsewarp import Intrinsics
from sparsewarp.raster import DEFAULT_Z_NEAR, rasterize_arrays

# fx = 256 and a corner principal point make screen coords equal camera x/z
# scaled by 256, so vertices given in units of 1/256 pixel are exact.
K = Intrinsics(fx=256.0, fy=256.0, cx=0.0, cy=0.0, width=128, height=112)


def verts_at(screen_uv, z):
    """Camera-frame vertices that project to the given screen coordinates."""
    out = []
    for (u, v), zi in zip(screen_uv, z):
        out.append([u / 256.0 * zi, v / 256.0 * zi, zi])
    return np.array(out, dtype=np.float64)


def flat_colors(n, rgb):
    return np.tile(np.asarray(rgb, dtype=np.float64), (n, 1))


TRI = np.array([[0, 1, 2]], dtype=np.int64)


class TestCoverage:
    def test_matches_point_in_triangle_brute_force(self):
        # Vertices on the 1/256 grid, generic position (no pixel center within
        # 1e-3 of an edge, asserted below), so float sign tests are exact.
        uv = [(10.25, 7.5), (100.75, 30.125), (40.5, 100.25)]
        verts = verts_at(uv, [1.0, 1.0, 1.0])
        _, _, valid = rasterize_arrays(verts, flat_colors(3, (200, 10, 10)), TRI, K)

        a, b, c = (np.array(p) for p in uv)
        ys, xs = np.mgrid[0 : K.height, 0 : K.width]
        pix = np.stack([xs, ys], axis=-1).astype(np.float64)

        def edge(p, q):
            return (q[0] - p[0]) * (pix[..., 1] - p[1]) - (q[1] - p[1]) * (pix[..., 0] - p[0])

        e0, e1, e2 = edge(a, b), edge(b, c), edge(c, a)
        inside = (e0 > 0) & (e1 > 0) & (e2 > 0) | (e0 < 0) & (e1 < 0) & (e2 < 0)
        # guard: no pixel center sits near an edge, so inside/outside is unambiguous
        edge_lengths = [np.linalg.norm(q - p) for p, q in ((a, b), (b, c), (c, a))]
        min_margin = np.minimum.reduce(
            [np.abs(e) / l for e, l in zip((e0, e1, e2), edge_lengths)]
        )
        assert min_margin[inside != valid].size == 0 or min_margin[inside != valid].min() > 0
        assert np.array_equal(valid, inside)
        assert valid.sum() > 1000

    def test_pixel_center_at_vertex_is_covered(self):
        verts = verts_at([(5.0, 5.0), (5.4, 5.2), (5.1, 5.5)], [1.0, 1.0, 1.0])
        _, _, valid = rasterize_arrays(verts, flat_colors(3, (255, 255, 255)), TRI, K)
        assert valid[5, 5]
        assert valid.sum() == 1

    def test_shared_edge_pixels_painted_exactly_once(self):
        # A quad split along its diagonal: the two halves must tile it with
        # no double coverage and no seam.
        quad = [(8.0, 8.0), (88.0, 8.0), (88.0, 72.0), (8.0, 72.0)]
        v = verts_at(quad, [1.0, 1.0, 1.0, 1.0])
        cols = flat_colors(4, (100, 100, 100))
        t1 = np.array([[0, 1, 2]], dtype=np.int64)
        t2 = np.array([[0, 2, 3]], dtype=np.int64)
        _, _, m1 = rasterize_arrays(v, cols, t1, K)
        _, _, m2 = rasterize_arrays(v, cols, t2, K)
        _, _, quad_mask = rasterize_arrays(v, cols, np.vstack([t1, t2]), K)
        # Pixel centers coinciding with a shared vertex are claimed by both
        # halves (vertex hits are always covered); everywhere else, including
        # the interior of the shared diagonal, ownership is exclusive.
        overlap = m1 & m2
        assert set(zip(*np.nonzero(overlap))) <= {(8, 8), (72, 88)}
        on_diagonal = np.zeros_like(m1)
        for k in range(17):
            on_diagonal[8 + 4 * k, 8 + 5 * k] = True
        assert not (overlap & ~on_diagonal).any()
        assert np.array_equal(m1 | m2, quad_mask)
        # half-open interior [8,88)x[8,72) plus the three off-interior corner
        # vertices picked up by the vertex rule
        assert quad_mask.sum() == 80 * 64 + 3
        assert quad_mask[8, 88] and quad_mask[72, 88] and quad_mask[72, 8]
        # interior diagonal pixel centers land in exactly one half
        inner = on_diagonal.copy()
        inner[8, 8] = inner[72, 88] = False
        assert ((m1 ^ m2) & inner).sum() == inner.sum()

    def test_degenerate_triangle_is_skipped(self):
        verts = verts_at([(10.0, 10.0), (20.0, 20.0), (30.0, 30.0)], [1.0, 1.0, 1.0])
        _, _, valid = rasterize_arrays(verts, flat_colors(3, (1, 2, 3)), TRI, K)
        assert valid.sum() == 0

    def test_winding_does_not_matter(self):
        uv = [(10.25, 7.5), (100.75, 30.125), (40.5, 100.25)]
        verts = verts_at(uv, [1.0, 1.0, 1.0])
        cols = flat_colors(3, (9, 9, 9))
        _, _, fwd = rasterize_arrays(verts, cols, np.array([[0, 1, 2]]), K)
        _, _, rev = rasterize_arrays(verts, cols, np.array([[0, 2, 1]]), K)
        assert np.array_equal(fwd, rev)


class TestZBuffer:
    def test_nearer_triangle_wins_overlap(self):
        near = verts_at([(10.0, 10.0), (70.0, 10.0), (10.0, 70.0)], [1.0, 1.0, 1.0])
        far = verts_at([(10.0, 10.0), (70.0, 10.0), (10.0, 70.0)], [2.0, 2.0, 2.0])
        verts = np.vstack([near, far])
        cols = np.vstack([flat_colors(3, (255, 0, 0)), flat_colors(3, (0, 255, 0))])
        tris = np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int64)
        for order in (tris, tris[::-1].copy()):
            rgb, depth, valid = rasterize_arrays(verts, cols, order, K)
            assert (rgb[valid] == [255, 0, 0]).all()
            assert np.allclose(depth[valid], 1.0)

    def test_equal_depth_first_submission_wins(self):
        tri = verts_at([(10.0, 10.0), (70.0, 10.0), (10.0, 70.0)], [1.5, 1.5, 1.5])
        verts = np.vstack([tri, tri])
        cols = np.vstack([flat_colors(3, (1, 2, 3)), flat_colors(3, (200, 200, 200))])
        tris = np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int64)
        rgb, _, valid = rasterize_arrays(verts, cols, tris, K)
        assert (rgb[valid] == [1, 2, 3]).all()

    def test_depth_is_perspective_correct(self):
        # A slanted planar triangle: interpolated depth must equal the exact
        # ray-plane intersection at every covered pixel.
        uv = [(12.0, 8.0), (100.0, 24.0), (40.0, 96.0)]
        z = [1.0, 2.5, 1.75]
        verts = verts_at(uv, z)
        rgb, depth, valid = rasterize_arrays(verts, flat_colors(3, (50, 60, 70)), TRI, K)
        n = np.cross(verts[1] - verts[0], verts[2] - verts[0])
        d = n @ verts[0]
        ys, xs = np.nonzero(valid)
        dirs = np.stack([xs / 256.0, ys / 256.0, np.ones_like(xs, dtype=np.float64)], axis=-1)
        t = d / (dirs @ n)
        assert np.abs(depth[ys, xs] - t).max() < 1e-9

    def test_attributes_are_perspective_correct(self):
        # Color equal to 60*x_cam must reproduce the 3D-linear ramp, not the
        # screen-linear one.
        uv = [(12.0, 8.0), (100.0, 24.0), (40.0, 96.0)]
        z = [1.0, 2.5, 1.75]
        verts = verts_at(uv, z)
        cols = np.stack([60.0 * verts[:, 0]] * 3, axis=1)
        rgb, depth, valid = rasterize_arrays(verts, cols, TRI, K)
        ys, xs = np.nonzero(valid)
        x_at_pixel = (xs / 256.0) * depth[ys, xs]
        expected = np.clip(np.rint(60.0 * x_at_pixel), 0, 255)
        assert np.abs(rgb[ys, xs, 0].astype(np.int64) - expected.astype(np.int64)).max() <= 1


class TestBordersAndClipping:
    def test_offscreen_fragments_discarded_without_wraparound(self):
        uv = [(-40.0, 20.0), (60.0, -30.0), (50.0, 90.0)]
        verts = verts_at(uv, [1.0, 1.0, 1.0])
        rgb, _, valid = rasterize_arrays(verts, flat_colors(3, (255, 255, 255)), TRI, K)
        assert valid.any()
        # nothing may appear near the right/bottom borders (no wrap)
        assert not valid[:, -20:].any()
        assert not valid[-10:, :].any()

    def test_fully_behind_near_plane_is_dropped(self):
        verts = verts_at([(10.0, 10.0), (60.0, 10.0), (10.0, 60.0)], [1.0, 1.0, 1.0])
        verts[:, 2] = -1.0
        _, _, valid = rasterize_arrays(verts, flat_colors(3, (9, 9, 9)), TRI, K)
        assert valid.sum() == 0

    def test_crossing_triangle_is_clipped_not_dropped(self):
        # One vertex behind the camera; the front part must still render and
        # every emitted depth must respect the near plane.
        verts = np.array(
            [
                [0.05, 0.05, 1.0],
                [0.3, 0.05, 1.5],
                [0.0, 0.0, -0.5],
            ]
        )
        _, depth, valid = rasterize_arrays(verts, flat_colors(3, (77, 77, 77)), TRI, K)
        assert valid.any()
        assert depth[valid].min() >= DEFAULT_Z_NEAR * (1 - 1e-12)

    def test_zero_triangles_is_fine(self):
        rgb, depth, valid = rasterize_arrays(
            np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), K
        )
        assert not valid.any()
        assert rgb.shape == (K.height, K.width, 3)

    def test_z_near_must_be_positive(self):
        verts = verts_at([(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)], [1, 1, 1])
        with pytest.raises(ValueError, match="z_near"):
            rasterize_arrays(verts, flat_colors(3, (0, 0, 0)), TRI, K, z_near=0.0)


class TestDeterminism:
    def test_bitwise_identical_across_threads(self, rng):
        n = 60
        verts = rng.uniform(-0.4, 0.4, size=(n, 3))
        verts[:, 2] = rng.uniform(0.5, 3.0, size=n)
        cols = rng.uniform(0, 255, size=(n, 3))
        tris = rng.integers(0, n, size=(40, 3)).astype(np.int64)

        def run(_):
            return rasterize_arrays(verts, cols, tris, K)

        base = run(0)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(run, range(16)))
        for rgb, depth, valid in results:
            assert np.array_equal(rgb, base[0])
            assert np.array_equal(depth, base[1])
            assert np.array_equal(valid, base[2])
