"""Synthetic two-camera-rig scenes: planes, affine correspondences, pixel noise.

Geometry follows a forward-facing stereo rig (baseline 1 m, cameras 640x480,
focal 400 px, principal point at the image center) moving 3 m per frame pair,
with the scene built from a ground plane plus random planes inside a cube in
front of the rig. Affinities are sampled by mapping the corners of a square
through the plane homography, adding pixel noise, and refitting.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ResampleExhausted
from .geometry import (
    AffineCorrespondence,
    PointCorrespondence,
    Pose,
    Rig,
    camera_pair_pose,
    skew,
)

MOTION_MODES = ("forward", "sideways", "random")
PAPER_SIDES = (30.0, 40.0)


@dataclass(frozen=True)
class SyntheticConfig:
    baseline: float = 1.0
    frame_translation: float = 3.0
    image_width: int = 640
    image_height: int = 480
    focal: float = 400.0
    cube: tuple = ((-5.0, 5.0), (-5.0, 5.0), (10.0, 20.0))
    n_planes: int = 50
    n_acs: int = 100
    n_ground: int = 50
    ground_height: float = 1.6
    square_side: float = 30.0
    pixel_sigma: float = 0.0
    motion: str = "random"
    perturb_deg: float = 10.0
    correspondence_mode: str = "inter"

    def __post_init__(self):
        if self.motion not in MOTION_MODES:
            raise ValueError(f"motion must be one of {MOTION_MODES}")
        if self.correspondence_mode not in ("inter", "intra", "mono", "mixed"):
            raise ValueError("correspondence_mode must be 'inter', 'intra', 'mixed' or 'mono'")
        if self.square_side <= 0 or self.pixel_sigma < 0:
            raise ValueError("square_side must be positive, pixel_sigma non-negative")

    def with_(self, **kw) -> "SyntheticConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class SyntheticScene:
    rig: Rig
    pose: Pose
    acs: tuple
    pcs: tuple
    config: SyntheticConfig
    seed: int


def _axis_rotation(axis: int, angle: float) -> np.ndarray:
    e = np.zeros(3)
    e[axis] = 1.0
    K = skew(e)
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


def perturbation_rotation(rng, max_deg: float) -> np.ndarray:
    """Rotations about x, y, z applied in order, each uniform in +-max_deg."""
    R = np.eye(3)
    for axis in range(3):
        R = _axis_rotation(axis, np.deg2rad(rng.uniform(-max_deg, max_deg))) @ R
    return R


def motion_pose(rng, cfg: SyntheticConfig) -> Pose:
    """Ground-truth rig pose: view-2 orientation perturbed, center moved 3 m."""
    if cfg.motion == "forward":
        d = np.array([0.0, 0.0, 1.0])
    elif cfg.motion == "sideways":
        d = np.array([1.0, 0.0, 0.0])
    else:
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
    p = cfg.frame_translation * d
    S = perturbation_rotation(rng, cfg.perturb_deg)
    return Pose(S.T, -S.T @ p)


def _pixel(cfg, xn) -> np.ndarray:
    return np.array(
        [cfg.focal * xn[0] + cfg.image_width / 2.0, cfg.focal * xn[1] + cfg.image_height / 2.0]
    )


def _unpixel(cfg, uv) -> np.ndarray:
    return np.array(
        [(uv[0] - cfg.image_width / 2.0) / cfg.focal, (uv[1] - cfg.image_height / 2.0) / cfg.focal, 1.0]
    )


def _visible(cfg, xn, depth) -> bool:
    if depth < 0.2:
        return False
    uv = _pixel(cfg, xn)
    return 0.0 <= uv[0] <= cfg.image_width and 0.0 <= uv[1] <= cfg.image_height


def fit_homography(src, dst) -> np.ndarray:
    """Normalized DLT from four (or more) point pairs in normalized coordinates."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)

    def norm_transform(pts):
        c = pts.mean(axis=0)
        d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
        s = np.sqrt(2.0) / max(d, 1e-12)
        T = np.array([[s, 0, -s * c[0]], [0, s, -s * c[1]], [0, 0, 1.0]])
        return T

    Ts, Td = norm_transform(src[:, :2]), norm_transform(dst[:, :2])
    rows = []
    for (x, y, _), (u, v, _) in zip(src @ Ts.T, dst @ Td.T):
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
    _, _, Vt = np.linalg.svd(np.asarray(rows))
    H = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ H @ Ts
    return H / H[2, 2]


def local_affine(H, x) -> tuple[np.ndarray, np.ndarray]:
    """First-order approximation of the homography map at x: (A 2x2, image point)."""
    s = H[2] @ x
    xp = H @ x / s
    A = np.array([[(H[u, v] - xp[u] * H[2, v]) / s for v in range(2)] for u in range(2)])
    return A, xp


@dataclass(frozen=True)
class _Plane:
    point: np.ndarray
    normal: np.ndarray


def _sample_planes(rng, cfg) -> list:
    planes = []
    (x0, x1), (y0, y1), (z0, z1) = cfg.cube
    for _ in range(cfg.n_planes):
        c = np.array([rng.uniform(x0, x1), rng.uniform(y0, y1), rng.uniform(z0, z1)])
        n = rng.standard_normal(3)
        n /= np.linalg.norm(n)
        planes.append(_Plane(c, n))
    return planes


def _point_on_plane(rng, cfg, plane, ground: bool) -> np.ndarray:
    (x0, x1), _, (z0, z1) = cfg.cube
    if ground:
        return np.array([rng.uniform(x0, x1), cfg.ground_height, rng.uniform(z0, z1)])
    u = np.cross(plane.normal, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-6:
        u = np.cross(plane.normal, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    v = np.cross(plane.normal, u)
    a, b = rng.uniform(-1.0, 1.0, size=2)
    return plane.point + a * u + b * v


def synth_scene(cfg: SyntheticConfig, seed: int) -> SyntheticScene:
    """Scene of cfg.n_acs affine correspondences (+ their noisy point pairs)."""
    rng = np.random.default_rng(seed)
    rig = Rig.stereo(cfg.baseline)
    pose = motion_pose(rng, cfg)
    ground = _Plane(np.array([0.0, cfg.ground_height, 15.0]), np.array([0.0, 1.0, 0.0]))
    planes = _sample_planes(rng, cfg)
    acs, pcs = [], []
    half = cfg.square_side / 2.0
    for k in range(cfg.n_acs):
        on_ground = k < cfg.n_ground
        plane = ground if on_ground else planes[(k - cfg.n_ground) % max(1, len(planes))]
        if cfg.correspondence_mode == "inter":
            cam_i, cam_j = (0, 1) if k % 2 == 0 else (1, 0)
        elif cfg.correspondence_mode == "intra":
            cam_i, cam_j = (0, 0) if k % 2 == 0 else (1, 1)
        elif cfg.correspondence_mode == "mixed":
            cam_i, cam_j = ((0, 1), (1, 0), (0, 0), (1, 1))[k % 4]
        else:
            cam_i, cam_j = 0, 0
        ci, cj = rig[cam_i], rig[cam_j]
        pair = camera_pair_pose(pose, ci, cj)
        n_cam, d = None, 0.0
        for attempt in range(400):
            if attempt and attempt % 40 == 0 and not on_ground:
                plane = _sample_planes(rng, cfg.with_(n_planes=1))[0]
            n_cam = ci.Q.T @ plane.normal
            d = float(n_cam @ (ci.Q.T @ (plane.point - ci.s)))
            if abs(d) < 1e-3:
                plane = _sample_planes(rng, cfg.with_(n_planes=1))[0]
                continue
            X = _point_on_plane(rng, cfg, plane, on_ground)
            Xc = ci.Q.T @ (X - ci.s)
            Xcp = cj.Q.T @ (pose.apply(X) - cj.s)
            if Xc[2] < 0.2 or Xcp[2] < 0.2:
                continue
            xn, xpn = Xc / Xc[2], Xcp / Xcp[2]
            if _visible(cfg, xn, Xc[2]) and _visible(cfg, xpn, Xcp[2]):
                break
        else:
            raise ResampleExhausted(f"no visible point for correspondence {k}")
        H = pair.R + np.outer(pair.t, n_cam) / d
        uv_c = _pixel(cfg, xn)
        corners_px = [
            uv_c + np.array([sx * half, sy * half])
            for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1))
        ]
        src, dst = [], []
        for uv in corners_px:
            xc = _unpixel(cfg, uv)
            xcp = H @ xc
            xcp = xcp / xcp[2]
            uvp = _pixel(cfg, xcp)
            uv_noisy = uv + rng.normal(0.0, cfg.pixel_sigma, size=2)
            uvp_noisy = uvp + rng.normal(0.0, cfg.pixel_sigma, size=2)
            src.append(_unpixel(cfg, uv_noisy))
            dst.append(_unpixel(cfg, uvp_noisy))
        uv_noisy = uv_c + rng.normal(0.0, cfg.pixel_sigma, size=2)
        uvp_noisy = _pixel(cfg, xpn) + rng.normal(0.0, cfg.pixel_sigma, size=2)
        x_noisy = _unpixel(cfg, uv_noisy)
        xp_noisy = _unpixel(cfg, uvp_noisy)
        if cfg.pixel_sigma > 0:
            Hn = fit_homography(src, dst)
            A, _ = local_affine(Hn, x_noisy)
        else:
            A, _ = local_affine(H, xn)
        acs.append(AffineCorrespondence(x_noisy, xp_noisy, cam_i, cam_j, A))
        pcs.append(PointCorrespondence(x_noisy, xp_noisy, cam_i, cam_j))
    return SyntheticScene(rig, pose, tuple(acs), tuple(pcs), cfg, seed)


def inject_outliers(scene: SyntheticScene, fraction: float, seed: int) -> tuple[SyntheticScene, np.ndarray]:
    """Replace a fraction of correspondences with gross mismatches.

    Returns the corrupted scene and the boolean ground-truth inlier mask.
    """
    rng = np.random.default_rng(seed)
    n = len(scene.acs)
    n_out = int(round(fraction * n))
    out_idx = set(rng.choice(n, size=n_out, replace=False).tolist())
    cfg = scene.config
    acs, pcs = [], []
    mask = np.ones(n, dtype=bool)
    for k, ac in enumerate(scene.acs):
        if k in out_idx:
            mask[k] = False
            uv = np.array([rng.uniform(0, cfg.image_width), rng.uniform(0, cfg.image_height)])
            xp = _unpixel(cfg, uv)
            A = np.eye(2) + rng.normal(0.0, 0.2, size=(2, 2))
            ac = AffineCorrespondence(ac.x, xp, ac.cam_first, ac.cam_second, A)
        acs.append(ac)
        pcs.append(ac.point_only())
    return SyntheticScene(scene.rig, scene.pose, tuple(acs), tuple(pcs), cfg, scene.seed), mask
