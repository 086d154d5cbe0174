"""Pose error metrics and the RANSAC iteration formula."""

from __future__ import annotations

import math

import numpy as np

from .errors import ZeroTranslation


def rotation_error(R_gt, R) -> float:
    """Angular difference in degrees: arccos((trace(R_gt R^T) - 1)/2)."""
    c = (float(np.trace(np.asarray(R_gt) @ np.asarray(R).T)) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def chordal_rotation_error(R_gt, rotations) -> float:
    """min_i ||R_i - R_gt||_F over candidate rotations (inf when empty)."""
    R_gt = np.asarray(R_gt)
    best = math.inf
    for R in rotations:
        best = min(best, float(np.linalg.norm(np.asarray(R) - R_gt)))
    return best


def translation_errors(t_gt, t) -> tuple[float, float]:
    """(eps_t, eps_t_dir): 2||t_gt - t||/(||t_gt|| + ||t||) and the angle in degrees."""
    t_gt = np.asarray(t_gt, dtype=float)
    t = np.asarray(t, dtype=float)
    n_gt, n = np.linalg.norm(t_gt), np.linalg.norm(t)
    denom = n_gt + n
    eps_t = 2.0 * float(np.linalg.norm(t_gt - t)) / denom if denom > 0 else 0.0
    if n_gt < 1e-12 or n < 1e-12:
        raise ZeroTranslation("direction error undefined for near-zero translation")
    c = float(t_gt @ t) / (n_gt * n)
    eps_dir = math.degrees(math.acos(min(1.0, max(-1.0, c))))
    return eps_t, eps_dir


def translation_direction_error(t_gt, t) -> float:
    return translation_errors(t_gt, t)[1]


def ransac_iterations(p: float, epsilon: float, s: int) -> int:
    """N = log(1-p)/log(1-(1-eps)^s), rounded to the nearest integer, >= 1."""
    if not 0.0 < p < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("outlier ratio must be in [0, 1)")
    if s < 1:
        raise ValueError("sample size must be >= 1")
    good = (1.0 - epsilon) ** s
    if good >= 1.0:
        return 1
    if good <= 0.0:
        return _ITER_CAP
    n = math.log(1.0 - p) / math.log(1.0 - good)
    return max(1, min(_ITER_CAP, int(math.floor(n + 0.5))))


_ITER_CAP = 2**31 - 1
