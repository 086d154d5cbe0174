"""Relative pose estimation for single cameras and multi-camera rigs.

Minimal solvers from two affine correspondences or six point correspondences,
built on Cayley-parameterized rotation, hidden-variable translation
elimination and factor-quotient equation systems, with an exact finite-field
verification layer and a synthetic evaluation harness.
"""

from . import errors
from .constraints import (
    EquationSystem,
    SourceConfig,
    ac_rows_gcam,
    ac_rows_single,
    classify_case,
    equations_gcam,
    equations_single,
    equations_sixpt,
    pc_row_gcam,
    rotation_angle_constraint,
)
from .fields import REAL, PrimeField, RealField
from .geometry import (
    AffineCorrespondence,
    CayleyRotation,
    PointCorrespondence,
    Pose,
    Rig,
    RigCamera,
    UnitQuaternion,
    camera_pair_pose,
    cayley_to_rotation,
    essential_from_pose,
    generalized_essential,
    normalize_rig_frame,
    quat_to_rotation,
    rotation_to_cayley,
)
from .metrics import (
    chordal_rotation_error,
    ransac_iterations,
    rotation_error,
    translation_errors,
)
from .poly import Poly3, PolyMatrix, cayley_norm_poly, det_poly, exact_quotient
from .polysolve import SolverConfig, solve_trivariate_system
from .ransac import RansacConfig, ransac_estimate
from .solvers import (
    PoseCandidate,
    SolutionSet,
    recover_translation_gcam,
    recover_translation_single,
    solve_17pt_linear,
    solve_2ac_gcam,
    solve_2ac_mono,
    solve_6pt_gcam,
)
from .synth import SyntheticConfig, SyntheticScene, synth_scene

__version__ = "0.1.0"

__all__ = [
    "AffineCorrespondence",
    "CayleyRotation",
    "EquationSystem",
    "PointCorrespondence",
    "Poly3",
    "PolyMatrix",
    "Pose",
    "PoseCandidate",
    "PrimeField",
    "RansacConfig",
    "REAL",
    "RealField",
    "Rig",
    "RigCamera",
    "SolutionSet",
    "SolverConfig",
    "SourceConfig",
    "SyntheticConfig",
    "SyntheticScene",
    "UnitQuaternion",
    "ac_rows_gcam",
    "ac_rows_single",
    "camera_pair_pose",
    "cayley_norm_poly",
    "cayley_to_rotation",
    "chordal_rotation_error",
    "classify_case",
    "det_poly",
    "equations_gcam",
    "equations_single",
    "equations_sixpt",
    "errors",
    "essential_from_pose",
    "exact_quotient",
    "generalized_essential",
    "normalize_rig_frame",
    "pc_row_gcam",
    "quat_to_rotation",
    "ransac_estimate",
    "ransac_iterations",
    "recover_translation_gcam",
    "recover_translation_single",
    "rotation_angle_constraint",
    "rotation_error",
    "rotation_to_cayley",
    "solve_17pt_linear",
    "solve_2ac_gcam",
    "solve_2ac_mono",
    "solve_6pt_gcam",
    "solve_trivariate_system",
    "synth_scene",
    "translation_errors",
]
