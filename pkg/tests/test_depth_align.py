import numpy as np
import pytest

from autolabel3d.depth_align import (
    DepthScaleConfig,
    DepthScaleFit,
    fit_depth_scale,
    unproject_scene,
)
from autolabel3d.errors import DegenerateDepth, InsufficientOverlap
from autolabel3d.geometry import CameraIntrinsics, project
from autolabel3d.rasterizer import DepthMap


def flat_maps(h=40, w=50, scale=2.5, rng=None):
    base = (
        rng.uniform(0.5, 4.0, size=(h, w))
        if rng is not None
        else np.full((h, w), 1.0)
    )
    return DepthMap(base), DepthMap(scale * base)


class TestFitDepthScale:
    def test_exact_scale_relation(self):
        d_rel, d_metric = flat_maps(scale=2.5, rng=np.random.default_rng(0))
        fit = fit_depth_scale(d_rel, d_metric)
        assert abs(fit.s_depth - 2.5) < 1e-9
        assert fit.inlier_ratio == 1.0

    def test_outlier_robustness(self):
        rng = np.random.default_rng(1)
        base = rng.uniform(0.5, 4.0, size=(60, 60))
        metric = 3.0 * base
        corrupt = rng.random(base.shape) < 0.2
        metric[corrupt] *= 10.0
        fit = fit_depth_scale(DepthMap(base), DepthMap(metric))
        assert abs(fit.s_depth - 3.0) < 1e-3
        assert abs(fit.inlier_ratio - 0.8) < 0.03

    def test_degenerate_all_zero(self):
        zero = DepthMap(np.zeros((30, 30)))
        metric = DepthMap(np.full((30, 30), 2.0))
        with pytest.raises(DegenerateDepth):
            fit_depth_scale(zero, metric)

    def test_insufficient_overlap(self):
        rel = np.zeros((30, 30))
        rel[0, :20] = 1.0  # only 20 jointly valid pixels
        with pytest.raises(InsufficientOverlap):
            fit_depth_scale(DepthMap(rel), DepthMap(np.full((30, 30), 2.0)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fit_depth_scale(DepthMap(np.ones((10, 10))), DepthMap(np.ones((10, 11))))

    def test_scale_equivariance_exact_for_power_of_two(self):
        rng = np.random.default_rng(2)
        base = rng.uniform(0.5, 4.0, size=(40, 40))
        metric = 1.7 * base + 0.01 * rng.standard_normal(base.shape)
        metric = np.abs(metric)
        fit1 = fit_depth_scale(DepthMap(base), DepthMap(metric))
        fit2 = fit_depth_scale(DepthMap(base), DepthMap(2.0 * metric))
        assert fit2.s_depth == 2.0 * fit1.s_depth

    def test_matches_closed_form_without_outliers(self):
        rng = np.random.default_rng(3)
        base = rng.uniform(0.5, 4.0, size=(40, 40))
        noise = 1.0 + 0.01 * rng.standard_normal(base.shape)  # inside 5% tolerance
        metric = 2.2 * base * noise
        cfg = DepthScaleConfig(sample_count=base.size)  # keep every pixel
        fit = fit_depth_scale(DepthMap(base), DepthMap(metric), cfg)
        rel, met = base.ravel(), metric.ravel()
        closed_form = np.dot(rel, met) / np.dot(rel, rel)
        assert abs(fit.s_depth - closed_form) < 1e-9

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(4)
        base = rng.uniform(0.5, 4.0, size=(50, 50))
        metric = 1.3 * base
        metric[rng.random(base.shape) < 0.3] *= 5.0
        f1 = fit_depth_scale(DepthMap(base), DepthMap(metric), DepthScaleConfig(seed=9))
        f2 = fit_depth_scale(DepthMap(base), DepthMap(metric), DepthScaleConfig(seed=9))
        assert f1 == f2

    def test_shift_variant(self):
        rng = np.random.default_rng(5)
        base = rng.uniform(0.5, 4.0, size=(50, 50))
        metric = 1.8 * base + 0.7
        cfg = DepthScaleConfig(with_shift=True)
        fit = fit_depth_scale(DepthMap(base), DepthMap(metric), cfg)
        assert abs(fit.s_depth - 1.8) < 1e-6
        assert abs(fit.shift - 0.7) < 1e-6


class TestUnprojectScene:
    def test_flat_plane(self):
        K = CameraIntrinsics(100, 100, 20, 15, 40, 30)
        d_rel = DepthMap(np.ones((30, 40)))
        fit = DepthScaleFit(s_depth=2.0, shift=0.0, inlier_ratio=1.0, n_samples=100)
        scene = unproject_scene(d_rel, fit, K)
        assert scene.valid.all()
        assert np.allclose(scene.points[:, :, 2], 2.0)

    def test_center_pixel_on_principal_axis(self):
        K = CameraIntrinsics(100, 100, 20, 15, 40, 30)
        d_rel = DepthMap(np.full((30, 40), 1.5))
        fit = DepthScaleFit(s_depth=2.0, shift=0.0, inlier_ratio=1.0, n_samples=100)
        scene = unproject_scene(d_rel, fit, K)
        assert np.allclose(scene.points[15, 20], [0.0, 0.0, 3.0])

    def test_reprojection_roundtrip(self):
        rng = np.random.default_rng(6)
        K = CameraIntrinsics(250, 260, 31.0, 23.0, 64, 48)
        d_rel = DepthMap(rng.uniform(0.5, 3.0, size=(48, 64)))
        fit = DepthScaleFit(s_depth=1.7, shift=0.0, inlier_ratio=1.0, n_samples=100)
        scene = unproject_scene(d_rel, fit, K)
        us, vs = np.meshgrid(np.arange(64), np.arange(48))
        pixels, _ = project(scene.points.reshape(-1, 3), K)
        expected = np.stack([us.ravel(), vs.ravel()], axis=1)
        assert np.allclose(pixels, expected, atol=1e-6)

    def test_invalid_pixels_marked(self):
        K = CameraIntrinsics(100, 100, 20, 15, 40, 30)
        vals = np.ones((30, 40))
        vals[0, 0] = 0.0
        vals[5, 5] = -1.0
        scene = unproject_scene(
            DepthMap(vals), DepthScaleFit(1.0, 0.0, 1.0, 100), K
        )
        assert not scene.valid[0, 0]
        assert not scene.valid[5, 5]
        assert scene.valid.sum() == 30 * 40 - 2
        assert np.all(scene.points[scene.valid][:, 2] > 0)
