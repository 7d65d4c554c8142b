import numpy as np
import pytest

from autolabel3d.errors import EmptyMesh
from autolabel3d.geometry import Pose, TriangleMesh, project, unproject
from autolabel3d.pipeline.synthetic import box_mesh, sphere_mesh
from autolabel3d.rasterizer import (
    default_turntable_intrinsics,
    look_at_pose,
    render,
    render_turntable,
)
from conftest import random_rotation


def quad_mesh(z: float, half: float = 1.0) -> TriangleMesh:
    v = np.array(
        [[-half, -half, z], [half, -half, z], [half, half, z], [-half, half, z]]
    )
    return TriangleMesh(v, np.array([[0, 1, 2], [0, 2, 3]]))


def hull_area(points2d: np.ndarray) -> float:
    """Shoelace area of the convex hull (monotone chain), used as an
    independent silhouette-area oracle."""
    pts = points2d[np.lexsort((points2d[:, 1], points2d[:, 0]))]

    def cross2(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half_hull(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross2(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half_hull(pts)
    upper = half_hull(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    x, y = hull[:, 0], hull[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1)))


class TestRender:
    def test_frontoparallel_quad_depth_exact(self, vga_camera):
        view = render(quad_mesh(z=2.0), vga_camera, Pose.identity())
        covered = view.mask.values
        assert covered.any()
        assert np.all(view.depth.values[covered] == 2.0)
        assert np.all(view.depth.values[~covered] == 0.0)

    def test_zbuffer_keeps_nearest(self, vga_camera):
        near = quad_mesh(z=1.0, half=0.2)
        far = quad_mesh(z=3.0, half=0.2)
        merged = TriangleMesh(
            np.vstack([far.vertices, near.vertices]),
            np.vstack([far.faces, near.faces + 4]),
        )
        view = render(merged, vga_camera, Pose.identity())
        near_view = render(near, vga_camera, Pose.identity())
        overlap = near_view.mask.values
        assert np.all(view.depth.values[overlap] == 1.0)

    def test_silhouette_area_matches_projected_hull(self, vga_camera):
        rng = np.random.default_rng(4)
        mesh = box_mesh(0.8, 1.1, 0.6)
        for _ in range(5):
            pose = Pose(random_rotation(rng), np.array([0.0, 0.0, 4.0]))
            view = render(mesh, vga_camera, pose)
            corners_cam = mesh.vertices @ pose.R.T + pose.T
            pixels, _ = project(corners_cam, vga_camera)
            analytic = hull_area(pixels)
            assert abs(view.mask.area - analytic) / analytic < 0.02

    def test_mask_is_support_of_valid_depth(self, vga_camera):
        view = render(sphere_mesh(0.5), vga_camera, Pose(np.eye(3), np.array([0, 0, 3.0])))
        assert np.array_equal(view.mask.values, view.depth.values > 0)

    def test_deterministic(self, vga_camera):
        pose = Pose(random_rotation(np.random.default_rng(1)), np.array([0, 0, 3.0]))
        a = render(box_mesh(), vga_camera, pose)
        b = render(box_mesh(), vga_camera, pose)
        assert np.array_equal(a.depth.values, b.depth.values)
        assert np.array_equal(a.mask.values, b.mask.values)

    def test_unprojected_pixels_lie_on_mesh_surface(self, vga_camera):
        mesh = box_mesh(1.0, 1.0, 1.0)
        pose = Pose(random_rotation(np.random.default_rng(9)), np.array([0, 0, 3.0]))
        view = render(mesh, vga_camera, pose)
        rows, cols = np.nonzero(view.depth.valid())
        pick = np.random.default_rng(0).choice(rows.size, 200, replace=False)
        for r, c in zip(rows[pick], cols[pick]):
            p_cam = unproject(np.array([float(c), float(r)]), view.depth.values[r, c], vga_camera)
            local = pose.inverse_transform(p_cam)
            # on the cube surface: the largest normalized coordinate hits 1/2
            assert abs(np.abs(local).max() - 0.5) < 1e-6

    def test_partially_behind_camera_clipped(self, vga_camera):
        # quad spanning the camera plane: must not crash, near part clipped
        v = np.array(
            [[-0.5, -0.5, -1.0], [0.5, -0.5, -1.0], [0.5, 0.5, 2.0], [-0.5, 0.5, 2.0]]
        )
        mesh = TriangleMesh(v, np.array([[0, 1, 2], [0, 2, 3]]))
        view = render(mesh, vga_camera, Pose.identity())
        valid = view.depth.values[view.mask.values]
        assert valid.size > 0
        assert np.all(valid > 0)

    def test_fully_behind_culled(self, vga_camera):
        view = render(quad_mesh(z=-2.0), vga_camera, Pose.identity())
        assert view.mask.area == 0

    def test_empty_mesh_raises(self, vga_camera):
        with pytest.raises(EmptyMesh):
            render(TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int)),
                   vga_camera, Pose.identity())


class TestTurntable:
    def test_azimuths_and_view_ids(self):
        mesh = box_mesh()
        views = render_turntable(mesh, elevation_deg=15.0, n_views=8)
        assert [v.view_id for v in views] == list(range(8))
        center = mesh.centroid()
        eyes = [v.pose.inverse().T for v in views]
        azimuths = sorted(
            (np.degrees(np.arctan2(e[0] - center[0], e[2] - center[2])) + 360) % 360
            for e in eyes
        )
        assert np.allclose(azimuths, [0, 45, 90, 135, 180, 225, 270, 315], atol=1e-6)

    def test_single_frontal_view_axis_through_centroid(self):
        mesh = box_mesh()
        (view,) = render_turntable(mesh, elevation_deg=0.0, n_views=1)
        centroid_cam = view.pose.transform(mesh.centroid())
        assert np.allclose(centroid_cam[:2], 0.0, atol=1e-9)
        assert centroid_cam[2] > 0

    def test_sphere_silhouettes_equal_across_views(self):
        views = render_turntable(sphere_mesh(0.5, n_lat=24, n_lon=40), 20.0, n_views=4)
        areas = [v.mask.area for v in views]
        assert max(areas) - min(areas) <= 0.01 * max(areas)

    def test_framing_fill(self):
        mesh = sphere_mesh(0.5, n_lat=24, n_lon=40)
        K, radius = default_turntable_intrinsics(mesh, size=256, fill=0.8)
        (view,) = render_turntable(mesh, 0.0, 1, K, radius)
        rows, cols = np.nonzero(view.mask.values)
        extent = max(rows.max() - rows.min(), cols.max() - cols.min())
        assert abs(extent - 0.8 * 256) < 0.05 * 256


class TestLookAt:
    def test_camera_axes_proper_rotation(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            eye = rng.normal(size=3) * 3
            target = rng.normal(size=3)
            if np.linalg.norm(target - eye) < 1e-3:
                continue
            pose = look_at_pose(eye, target, np.array([0.0, 1.0, 0.0]))
            fwd = pose.transform(target)
            assert np.allclose(fwd[:2], 0, atol=1e-9)
            assert fwd[2] > 0

    def test_degenerate_up_fallback(self):
        pose = look_at_pose(np.array([0.0, 5.0, 0.0]), np.zeros(3), np.array([0.0, 1.0, 0.0]))
        assert np.allclose(pose.R @ pose.R.T, np.eye(3), atol=1e-9)
