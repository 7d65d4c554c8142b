import numpy as np
import pytest

from autolabel3d.geometry import Box3D, CameraIntrinsics, rotation_about_axis


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    return rotation_about_axis(rng.normal(size=3), rng.uniform(0.0, np.pi))


def random_box(rng: np.random.Generator, center_span=1.0, dim_lo=0.3, dim_hi=2.0) -> Box3D:
    return Box3D(
        center=rng.uniform(-center_span, center_span, 3),
        dims=rng.uniform(dim_lo, dim_hi, 3),
        rotation=random_rotation(rng),
    )


def geodesic_deg(Ra: np.ndarray, Rb: np.ndarray) -> float:
    c = (np.trace(Ra.T @ Rb) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


@pytest.fixture
def vga_camera() -> CameraIntrinsics:
    return CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)
