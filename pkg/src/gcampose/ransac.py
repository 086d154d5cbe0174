"""RANSAC over affine/point correspondences with adaptive iteration count.

The inlier residual is the angle between each observed bearing and the
epipolar plane induced by the hypothesis's per-camera-pair essential matrix,
taking the worse of the two views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoModelFound, GcamPoseError
from .geometry import Pose, Rig, camera_pair_pose, essential_from_pose
from .metrics import ransac_iterations


@dataclass(frozen=True)
class RansacConfig:
    confidence: float = 0.99
    inlier_threshold_deg: float = 0.1
    max_iterations: int = 1000
    min_iterations: int = 1
    seed: int = 0


def epipolar_plane_angle(pose: Pose, rig: Rig, corr) -> float:
    """Worst-view angle (degrees) between bearing and epipolar plane."""
    pair = camera_pair_pose(pose, rig[corr.cam_first], rig[corr.cam_second])
    E = essential_from_pose(pair)
    return _plane_angle(E, corr.x, corr.xp)


def _plane_angle(E, x, xp) -> float:
    f = x / np.linalg.norm(x)
    fp = xp / np.linalg.norm(xp)
    n2 = E @ f
    n1 = E.T @ fp
    a2 = _asin_abs(fp @ n2, np.linalg.norm(n2))
    a1 = _asin_abs(f @ n1, np.linalg.norm(n1))
    return math.degrees(max(a1, a2))


def _asin_abs(dot, norm) -> float:
    if norm < 1e-15:
        return 0.0
    return math.asin(min(1.0, abs(float(dot)) / norm))


def _residuals(pose: Pose, rig: Rig, correspondences) -> np.ndarray:
    """Vectorized worst-view epipolar-plane angles (degrees)."""
    out = np.empty(len(correspondences))
    groups: dict = {}
    for k, c in enumerate(correspondences):
        groups.setdefault((c.cam_first, c.cam_second), []).append(k)
    for (ci, cj), idx in groups.items():
        pair = camera_pair_pose(pose, rig[ci], rig[cj])
        E = essential_from_pose(pair)
        X = np.array([correspondences[k].x for k in idx])
        Xp = np.array([correspondences[k].xp for k in idx])
        F = X / np.linalg.norm(X, axis=1, keepdims=True)
        Fp = Xp / np.linalg.norm(Xp, axis=1, keepdims=True)
        N2 = F @ E.T
        N1 = Fp @ E
        d2 = np.abs(np.einsum("nc,nc->n", Fp, N2))
        d1 = np.abs(np.einsum("nc,nc->n", F, N1))
        n2 = np.maximum(np.linalg.norm(N2, axis=1), 1e-15)
        n1 = np.maximum(np.linalg.norm(N1, axis=1), 1e-15)
        a = np.arcsin(np.minimum(1.0, np.maximum(d2 / n2, d1 / n1)))
        out[np.array(idx)] = np.degrees(a)
    return out


def ransac_estimate(
    correspondences,
    solver,
    rig: Rig,
    cfg: RansacConfig | None = None,
    sampler=None,
):
    """Best-inlier-count pose over solver hypotheses.

    ``solver(sample) -> SolutionSet`` consumes a tuple of correspondences;
    ``sampler(rng, correspondences) -> sample`` draws one minimal sample
    (default: uniform pairs). Returns (pose, inlier mask, stats dict).
    """
    cfg = cfg or RansacConfig()
    corr = list(correspondences)
    rng = np.random.default_rng(cfg.seed)
    if sampler is None:
        sampler = lambda r, cs: tuple(cs[i] for i in r.choice(len(cs), size=2, replace=False))
    probe = sampler(rng, corr)
    sample_size = len(probe)
    if len(corr) < sample_size:
        raise NoModelFound(f"{len(corr)} correspondences < sample size {sample_size}")
    rng = np.random.default_rng(cfg.seed)

    best = None  # (inliers, -hypothesis_index) maximized
    limit = cfg.max_iterations
    it = 0
    hypotheses = 0
    while it < limit:
        it += 1
        sample = sampler(rng, corr)
        try:
            solutions = solver(sample)
        except GcamPoseError:
            continue
        for cand in solutions.candidates:
            hypotheses += 1
            res = _residuals(cand.pose, rig, corr)
            mask = res <= cfg.inlier_threshold_deg
            n_in = int(mask.sum())
            if best is None or n_in > best[0]:
                best = (n_in, cand, mask)
                if n_in >= sample_size:
                    eps = 1.0 - n_in / len(corr)
                    needed = ransac_iterations(cfg.confidence, eps, sample_size)
                    limit = min(cfg.max_iterations, max(cfg.min_iterations, needed))
    if best is None or best[0] < sample_size:
        raise NoModelFound("no hypothesis reached the minimum inlier count")
    n_in, cand, mask = best
    stats = {
        "iterations": it,
        "hypotheses": hypotheses,
        "inliers": n_in,
        "inlier_ratio": n_in / len(corr),
        "adaptive_limit": limit,
    }
    return cand.pose, mask, stats


def pair_sampler(target_case_filter):
    """Sampler drawing AC pairs until the pair satisfies a case predicate."""

    def sample(rng, corr):
        for _ in range(64):
            i, j = rng.choice(len(corr), size=2, replace=False)
            if target_case_filter(corr[i], corr[j]):
                return (corr[i], corr[j])
        return (corr[0], corr[1])

    return sample


def stratified_sixpt_sampler(rng, corr):
    """Three PCs from each of the two camera-pair groups present."""
    groups: dict = {}
    for c in corr:
        groups.setdefault((c.cam_first, c.cam_second), []).append(c)
    keys = sorted(groups, key=lambda k: -len(groups[k]))[:2]
    if len(keys) == 2 and all(len(groups[k]) >= 3 for k in keys):
        out = []
        for k in keys:
            idx = rng.choice(len(groups[k]), size=3, replace=False)
            out.extend(groups[k][i] for i in idx)
        return tuple(out)
    idx = rng.choice(len(corr), size=6, replace=False)
    return tuple(corr[i] for i in idx)
