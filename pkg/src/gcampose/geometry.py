"""Rotation parameterizations, rig extrinsics, essential matrices, frame normalization.

Pose convention: ``X2 = R @ X1 + t`` maps view-1 coordinates to view-2
coordinates; a rig camera maps camera coordinate to rig coordinates via
``X_rig = Q @ X_cam + s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentCameras, NearPiRotation

_NEAR_PI_TOL = 1e-9


def _as_array(v, shape):
    a = np.asarray(v, dtype=float)
    if a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CayleyRotation:
    q_x: float
    q_y: float
    q_z: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.q_x, self.q_y, self.q_z])


@dataclass(frozen=True)
class UnitQuaternion:
    q_w: float
    q_x: float
    q_y: float
    q_z: float

    def __post_init__(self):
        n = self.q_w**2 + self.q_x**2 + self.q_y**2 + self.q_z**2
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"quaternion norm^2 = {n}, not 1")


@dataclass(frozen=True)
class Pose:
    """Relative rotation and translation from the first view to the second."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _as_array(self.R, (3, 3)))
        object.__setattr__(self, "t", _as_array(self.t, (3,)))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    def inverse(self) -> "Pose":
        return Pose(self.R.T, -self.R.T @ self.t)

    def apply(self, X) -> np.ndarray:
        return self.R @ np.asarray(X, dtype=float) + self.t


@dataclass(frozen=True)
class RigCamera:
    """Extrinsics of one perspective camera relative to the rig reference."""

    Q: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", _as_array(self.Q, (3, 3)))
        object.__setattr__(self, "s", _as_array(self.s, (3,)))


@dataclass(frozen=True)
class Rig:
    cameras: tuple

    def __post_init__(self):
        cams = tuple(self.cameras)
        if not cams:
            raise ValueError("rig needs at least one camera")
        object.__setattr__(self, "cameras", cams)

    def __len__(self):
        return len(self.cameras)

    def __getitem__(self, i) -> RigCamera:
        return self.cameras[i]

    @classmethod
    def single(cls) -> "Rig":
        return cls((RigCamera(np.eye(3), np.zeros(3)),))

    @classmethod
    def stereo(cls, baseline: float = 1.0) -> "Rig":
        """Forward-facing two-camera rig, centers at +-baseline/2 along x."""
        h = baseline / 2.0
        return cls((RigCamera(np.eye(3), [-h, 0, 0]), RigCamera(np.eye(3), [h, 0, 0])))


@dataclass(frozen=True)
class AffineCorrespondence:
    """Point pair in normalized homogeneous coordinates plus the 2x2 local affinity."""

    x: np.ndarray
    xp: np.ndarray
    cam_first: int
    cam_second: int
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_array(self.x, (3,)))
        object.__setattr__(self, "xp", _as_array(self.xp, (3,)))
        object.__setattr__(self, "A", _as_array(self.A, (2, 2)))
        if abs(self.x[2] - 1.0) > 1e-12 or abs(self.xp[2] - 1.0) > 1e-12:
            raise ValueError("image points must be normalized with third entry 1")

    def point_only(self) -> "PointCorrespondence":
        return PointCorrespondence(self.x, self.xp, self.cam_first, self.cam_second)


@dataclass(frozen=True)
class PointCorrespondence:
    x: np.ndarray
    xp: np.ndarray
    cam_first: int
    cam_second: int

    def __post_init__(self):
        object.__setattr__(self, "x", _as_array(self.x, (3,)))
        object.__setattr__(self, "xp", _as_array(self.xp, (3,)))
        if abs(self.x[2] - 1.0) > 1e-12 or abs(self.xp[2] - 1.0) > 1e-12:
            raise ValueError("image points must be normalized with third entry 1")


def skew(v) -> np.ndarray:
    """Cross-product matrix [v]x."""
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def cayley_to_rotation(c: CayleyRotation | np.ndarray) -> np.ndarray:
    """Rotation matrix of a Cayley vector, including the 1/(|q|^2+1) scale."""
    if isinstance(c, CayleyRotation):
        qx, qy, qz = c.q_x, c.q_y, c.q_z
    else:
        qx, qy, qz = np.asarray(c, dtype=float)
    s = 1.0 + qx * qx + qy * qy + qz * qz
    num = np.array(
        [
            [1 + qx * qx - qy * qy - qz * qz, 2 * qx * qy - 2 * qz, 2 * qx * qz + 2 * qy],
            [2 * qx * qy + 2 * qz, 1 - qx * qx + qy * qy - qz * qz, 2 * qy * qz - 2 * qx],
            [2 * qx * qz - 2 * qy, 2 * qy * qz + 2 * qx, 1 - qx * qx - qy * qy + qz * qz],
        ]
    )
    return num / s


def rotation_to_cayley(R) -> CayleyRotation:
    """Inverse Cayley map; raises NearPiRotation near 180 degrees."""
    R = np.asarray(R, dtype=float)
    tr = float(np.trace(R))
    if 1.0 + tr < _NEAR_PI_TOL:
        raise NearPiRotation(f"1 + trace(R) = {1.0 + tr:.3e}")
    v = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]) / (1.0 + tr)
    return CayleyRotation(*v)


def quat_to_rotation(q: UnitQuaternion | np.ndarray) -> np.ndarray:
    if isinstance(q, UnitQuaternion):
        w, x, y, z = q.q_w, q.q_x, q.q_y, q.q_z
    else:
        w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [w * w + x * x - y * y - z * z, 2 * x * y - 2 * w * z, 2 * x * z + 2 * w * y],
            [2 * x * y + 2 * w * z, w * w - x * x + y * y - z * z, 2 * y * z - 2 * w * x],
            [2 * x * z - 2 * w * y, 2 * y * z + 2 * w * x, w * w - x * x - y * y + z * z],
        ]
    )


def essential_from_pose(pose: Pose) -> np.ndarray:
    """E = [t]x R."""
    return skew(pose.t) @ pose.R


def camera_pair_pose(rig_pose: Pose, cam_i: RigCamera, cam_j: RigCamera) -> Pose:
    """Pose from camera i in view 1 to camera j in view 2 (three-transform composition)."""
    R = cam_j.Q.T @ rig_pose.R @ cam_i.Q
    t = cam_j.Q.T @ (rig_pose.R @ cam_i.s + rig_pose.t - cam_j.s)
    return Pose(R, t)


def generalized_essential(rig_pose: Pose, cam_i: RigCamera, cam_j: RigCamera) -> np.ndarray:
    """Per-camera-pair essential matrix, linear in the rig rotation.

    Qj^T (R [s_i]x + [t - s_j]x R) Qi; identical to
    essential_from_pose(camera_pair_pose(...)) via [R v]x R = R [v]x.
    """
    R, t = rig_pose.R, rig_pose.t
    inner = R @ skew(cam_i.s) + skew(t - cam_j.s) @ R
    return cam_j.Q.T @ inner @ cam_i.Q


def normalize_rig_frame(s1, s2) -> tuple[np.ndarray, np.ndarray]:
    """Map (R0, t0) sending the two camera centers onto +-(L/(2*sqrt(3)))(1,1,1).

    The new origin is the midpoint of the centers; Rodrigues' formula aligns the
    baseline with (1,1,1)/sqrt(3). Returns R0, t0 with p -> R0 @ p + t0.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    L = np.linalg.norm(s2 - s1)
    if L < 1e-12:
        raise CoincidentCameras("camera centers coincide")
    a = (s2 - s1) / L
    b = np.ones(3) / np.sqrt(3.0)
    v = np.cross(a, b)
    sin_ang = np.linalg.norm(v)
    if sin_ang > 1e-10:
        v = v / sin_ang
        K = skew(v)
        R0 = np.eye(3) + sin_ang * K + (1.0 - a @ b) * (K @ K)
    else:
        R0 = np.eye(3) if a @ b > 0 else _flip_about_perpendicular(a)
    t0 = -R0 @ ((s1 + s2) / 2.0)
    return R0, t0


def _flip_about_perpendicular(a) -> np.ndarray:
    # 180-degree rotation about any axis perpendicular to a
    w = np.cross(a, [1.0, 0.0, 0.0])
    if np.linalg.norm(w) < 1e-6:
        w = np.cross(a, [0.0, 1.0, 0.0])
    w = w / np.linalg.norm(w)
    K = skew(w)
    return np.eye(3) + 2.0 * (K @ K)


def transform_rig_frame(rig: Rig, pose: Pose, R0, t0) -> tuple[Rig, Pose]:
    """Re-express rig extrinsics and the rig pose in the frame p -> R0 p + t0.

    Camera-pair poses, hence all correspondence residuals, are unchanged.
    """
    R0 = np.asarray(R0, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    cams = tuple(RigCamera(R0 @ c.Q, R0 @ c.s + t0) for c in rig.cameras)
    Rn = R0 @ pose.R @ R0.T
    tn = R0 @ pose.t + t0 - Rn @ t0
    return Rig(cams), Pose(Rn, tn)


def untransform_pose(pose_new: Pose, R0, t0) -> Pose:
    """Inverse of transform_rig_frame on the pose component."""
    R0 = np.asarray(R0, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    R = R0.T @ pose_new.R @ R0
    t = R0.T @ (pose_new.t - t0 + pose_new.R @ t0)
    return Pose(R, t)
