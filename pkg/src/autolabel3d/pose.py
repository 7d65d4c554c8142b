"""Object pose and metric scale from lifted 2D-3D correspondences.

Pose comes from P3P hypotheses inside RANSAC (a 4th point disambiguates
the up-to-four P3P solutions) followed by Gauss-Newton refinement over
all inliers.  Metric scale is the median real/rendered depth ratio over
the mask overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateConfiguration,
    EmptyOverlap,
    NonPositiveScale,
    TooFewCorrespondences,
    UnknownViewId,
)
from .geometry import (
    CameraIntrinsics,
    Pose,
    SimilarityTransform,
    TriangleMesh,
    apply_similarity,
)
from .rasterizer import DepthMap, InstanceMask, RenderedView


@dataclass(frozen=True)
class Match2D2D:
    """A 2D-2D match between the real image (x0) and rendered view (x1)."""

    x0: np.ndarray
    x1: np.ndarray
    view_id: int
    confidence: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=np.float64).reshape(2))
        object.__setattr__(self, "x1", np.asarray(self.x1, dtype=np.float64).reshape(2))


@dataclass(frozen=True)
class Corr3D2D:
    """A 3D point in the render-world frame paired with its real-image pixel."""

    X_c: np.ndarray
    x0: np.ndarray
    confidence: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "X_c", np.asarray(self.X_c, dtype=np.float64).reshape(3))
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=np.float64).reshape(2))


@dataclass(frozen=True)
class LiftConfig:
    border_px: int = 5
    min_confidence: float = 0.0


@dataclass(frozen=True)
class PnPConfig:
    iterations: int = 1000
    reproj_thresh_px: float | None = None  # default 1% of image diagonal
    seed: int = 0
    confidence: float = 0.999


@dataclass(frozen=True)
class PnPResult:
    pose: Pose
    inlier_indices: np.ndarray
    mean_reprojection_error: float


def lift_matches(
    matches: list[Match2D2D],
    views: list[RenderedView],
    cfg: LiftConfig | None = None,
) -> list[Corr3D2D]:
    """Lift 2D-2D matches into render-world 3D <-> image-2D correspondences.

    Drops matches whose rendered pixel falls within border_px of the render
    border, reads invalid depth, or scores below min_confidence.  The 3D
    point is the rendered-depth unprojection mapped back through the view's
    inverse pose into the shared render-world frame.
    """
    cfg = cfg or LiftConfig()
    by_id = {v.view_id: v for v in views}
    out = []
    for m in matches:
        view = by_id.get(m.view_id)
        if view is None:
            raise UnknownViewId(f"match references unknown view {m.view_id}")
        if m.confidence < cfg.min_confidence:
            continue
        u, v = m.x1
        w, h = view.K.width, view.K.height
        if not (cfg.border_px <= u <= w - 1 - cfg.border_px):
            continue
        if not (cfg.border_px <= v <= h - 1 - cfg.border_px):
            continue
        r, c = int(round(v)), int(round(u))
        depth = view.depth.values[r, c]
        if not (np.isfinite(depth) and depth > 0):
            continue
        x = (u - view.K.cx) / view.K.fx * depth
        y = (v - view.K.cy) / view.K.fy * depth
        X_world = view.pose.inverse_transform(np.array([x, y, depth]))
        out.append(Corr3D2D(X_world, m.x0, m.confidence))
    return out


def _p3p_grunert(P: np.ndarray, f: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Grunert P3P: world points (3,3) + unit bearings (3,3) -> candidate (R, T).

    Solves the law-of-cosines system for the camera-point distances via a
    quartic assembled with exact polynomial arithmetic, then recovers each
    pose by absolute orientation.
    """
    a = np.linalg.norm(P[1] - P[2])
    b = np.linalg.norm(P[0] - P[2])
    c = np.linalg.norm(P[0] - P[1])
    if min(a, b, c) < 1e-12:
        return []
    cos_a = float(f[1] @ f[2])
    cos_b = float(f[0] @ f[2])
    cos_g = float(f[0] @ f[1])

    q = (a * a - c * c) / (b * b)
    w = (c * c) / (b * b)
    # with u = s2/s1, v = s3/s1:
    #   u = N(v) / D(v),  and  N^2 - 2*cos_g*N*D + E*D^2 = 0
    N = np.array([q - 1.0, -2.0 * q * cos_b, 1.0 + q])
    D = np.array([-2.0 * cos_a, 2.0 * cos_g])
    E = np.array([-w, 2.0 * w * cos_b, 1.0 - w])
    quartic = np.polyadd(
        np.polysub(np.polymul(N, N), 2.0 * cos_g * np.polymul(N, D)),
        np.polymul(E, np.polymul(D, D)),
    )

    roots = np.roots(quartic)
    solutions = []
    for root in roots:
        if abs(root.imag) > 1e-8:
            continue
        v = float(root.real)
        if v <= 0:
            continue
        denom_u = 2.0 * (cos_g - v * cos_a)
        if abs(denom_u) < 1e-12:
            continue
        u = ((q - 1.0) * v * v - 2.0 * q * cos_b * v + 1.0 + q) / denom_u
        if u <= 0:
            continue
        s1_sq = b * b / (1.0 + v * v - 2.0 * v * cos_b)
        if s1_sq <= 0:
            continue
        s1 = math.sqrt(s1_sq)
        s = np.array([s1, u * s1, v * s1])
        Y = f * s[:, None]
        pose = _absolute_orientation(P, Y)
        if pose is not None:
            solutions.append(pose)
    return solutions


def _absolute_orientation(P: np.ndarray, Y: np.ndarray):
    """Rigid (R, T) with Y_i = R @ P_i + T, via Kabsch."""
    Pc = P - P.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    H = Pc.T @ Yc
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    if d == 0:
        return None
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    T = Y.mean(axis=0) - R @ P.mean(axis=0)
    return R, T


def _reproj_errors(
    X: np.ndarray, x: np.ndarray, R: np.ndarray, T: np.ndarray, K: CameraIntrinsics
) -> np.ndarray:
    """Per-point pixel reprojection error; inf for points behind the camera."""
    p = X @ R.T + T
    z = p[:, 2]
    err = np.full(len(X), np.inf)
    front = z > 1e-12
    u = K.fx * p[front, 0] / z[front] + K.cx
    v = K.fy * p[front, 1] / z[front] + K.cy
    err[front] = np.hypot(u - x[front, 0], v - x[front, 1])
    return err


def _refine_gauss_newton(
    X: np.ndarray, x: np.ndarray, R: np.ndarray, T: np.ndarray, K: CameraIntrinsics,
    max_iters: int = 25,
):
    """Minimize total squared reprojection error over (R, T)."""
    R = R.copy()
    T = T.copy()
    n = len(X)
    for _ in range(max_iters):
        p = X @ R.T + T
        z = p[:, 2]
        if np.any(z <= 1e-9):
            break
        u = K.fx * p[:, 0] / z + K.cx
        v = K.fy * p[:, 1] / z + K.cy
        r = np.stack([u - x[:, 0], v - x[:, 1]], axis=1).reshape(-1)

        # d(pixel)/d(camera point), then chain through the left-perturbed
        # rotation: dp/d(omega) = -[RX]x, dp/dt = I
        J = np.zeros((2 * n, 6))
        RX = p - T
        inv_z = 1.0 / z
        du = np.stack(
            [K.fx * inv_z, np.zeros(n), -K.fx * p[:, 0] * inv_z**2], axis=1
        )
        dv = np.stack(
            [np.zeros(n), K.fy * inv_z, -K.fy * p[:, 1] * inv_z**2], axis=1
        )
        neg_skew = np.zeros((n, 3, 3))
        neg_skew[:, 0, 1] = RX[:, 2]
        neg_skew[:, 0, 2] = -RX[:, 1]
        neg_skew[:, 1, 0] = -RX[:, 2]
        neg_skew[:, 1, 2] = RX[:, 0]
        neg_skew[:, 2, 0] = RX[:, 1]
        neg_skew[:, 2, 1] = -RX[:, 0]
        J[0::2, :3] = np.einsum("ni,nij->nj", du, neg_skew)
        J[0::2, 3:] = du
        J[1::2, :3] = np.einsum("ni,nij->nj", dv, neg_skew)
        J[1::2, 3:] = dv

        JtJ = J.T @ J + 1e-12 * np.eye(6)
        delta = np.linalg.solve(JtJ, -J.T @ r)
        omega, dt = delta[:3], delta[3:]
        angle = np.linalg.norm(omega)
        if angle > 1e-15:
            k = omega / angle
            Kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
            dR = np.eye(3) + math.sin(angle) * Kx + (1 - math.cos(angle)) * (Kx @ Kx)
            R = dR @ R
        T = T + dt
        if np.linalg.norm(delta) < 1e-12:
            break
    # re-orthonormalize against accumulated drift
    U, _, Vt = np.linalg.svd(R)
    R = U @ np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))]) @ Vt
    return R, T


def solve_pnp_ransac(
    corrs: list[Corr3D2D], K: CameraIntrinsics, cfg: PnPConfig | None = None
) -> PnPResult:
    """Estimate the render-world-to-camera pose from 3D-2D correspondences.

    RANSAC over P3P minimal samples (4th point picks among the quartic's
    solutions), adaptive iteration count, then Gauss-Newton refinement on
    the winning inlier set.  Deterministic per seed.
    """
    cfg = cfg or PnPConfig()
    n = len(corrs)
    if n < 4:
        raise TooFewCorrespondences(f"need >= 4 correspondences, got {n}")
    X = np.array([c.X_c for c in corrs])
    x = np.array([c.x0 for c in corrs])

    centered = X - X.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[1] <= 1e-9 * max(svals[0], 1.0):
        raise DegenerateConfiguration("correspondence points are collinear")

    thresh = cfg.reproj_thresh_px
    if thresh is None:
        thresh = 0.01 * K.diagonal_px

    # bearing vectors for the minimal solver
    rays = np.stack(
        [(x[:, 0] - K.cx) / K.fx, (x[:, 1] - K.cy) / K.fy, np.ones(n)], axis=1
    )
    rays /= np.linalg.norm(rays, axis=1, keepdims=True)

    rng = np.random.default_rng(cfg.seed)
    best_count = 0
    best_pose = None
    max_iters = cfg.iterations
    it = 0
    while it < max_iters:
        it += 1
        sample = rng.choice(n, size=4, replace=False)
        tri, probe = sample[:3], sample[3]
        for R, T in _p3p_grunert(X[tri], rays[tri]):
            probe_err = _reproj_errors(X[probe : probe + 1], x[probe : probe + 1], R, T, K)[0]
            if probe_err > thresh:
                continue
            errs = _reproj_errors(X, x, R, T, K)
            count = int(np.count_nonzero(errs <= thresh))
            if count > best_count:
                best_count = count
                best_pose = (R, T)
                w_in = count / n
                if w_in > 0:
                    denom = math.log(max(1.0 - w_in**4, 1e-12))
                    needed = math.log(max(1.0 - cfg.confidence, 1e-12)) / denom
                    max_iters = min(cfg.iterations, max(it, int(math.ceil(needed))))
    if best_pose is None:
        raise DegenerateConfiguration("RANSAC found no pose satisfying the threshold")

    R, T = best_pose
    inliers = np.flatnonzero(_reproj_errors(X, x, R, T, K) <= thresh)
    R, T = _refine_gauss_newton(X[inliers], x[inliers], R, T, K)

    # residual-based trim: a stray point that lands inside the RANSAC
    # threshold by chance would otherwise bias the least-squares pose
    errs = _reproj_errors(X, x, R, T, K)
    sigma = 1.4826 * np.median(errs[inliers])
    trim = np.flatnonzero(errs <= min(thresh, max(4.0 * sigma, 1e-9)))
    if 4 <= trim.size < inliers.size:
        R, T = _refine_gauss_newton(X[trim], x[trim], R, T, K)
        errs = _reproj_errors(X, x, R, T, K)

    inliers = np.flatnonzero(errs <= thresh)
    if inliers.size == 0:
        raise DegenerateConfiguration("refinement left no inliers")
    return PnPResult(
        pose=Pose(R, T),
        inlier_indices=inliers,
        mean_reprojection_error=float(errs[inliers].mean()),
    )


def estimate_scale_median(
    d_real: DepthMap,
    d_render: DepthMap,
    m: InstanceMask,
    m_render: InstanceMask,
) -> float:
    """Median of real/rendered depth ratios over the mask overlap.

    Only pixels with valid depth in both maps contribute; for an even
    count the lower median is taken.
    """
    shapes = {
        (d_real.height, d_real.width),
        (d_render.height, d_render.width),
        (m.height, m.width),
        (m_render.height, m_render.width),
    }
    if len(shapes) != 1:
        raise ValueError("depth maps and masks must share dimensions")
    omega = m.values & m_render.values & d_real.valid() & d_render.valid()
    if not omega.any():
        raise EmptyOverlap("masks share no valid-depth pixel")
    ratios = np.sort(d_real.values[omega] / d_render.values[omega])
    return float(ratios[(ratios.size - 1) // 2])


def place_object(
    m: TriangleMesh, pnp: PnPResult, s: float
) -> tuple[TriangleMesh, SimilarityTransform]:
    """Scale the PnP placement to metric: v' = s * (R v + T) = s R v + (s T).

    Scaling about the camera center preserves the silhouette while moving
    the object to its metric distance, so only the translation absorbs s.
    """
    if s <= 0:
        raise NonPositiveScale(f"scale must be positive, got {s}")
    transform = SimilarityTransform(s, Pose(pnp.pose.R, s * pnp.pose.T))
    return apply_similarity(m, transform), transform
