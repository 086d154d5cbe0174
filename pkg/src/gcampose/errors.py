"""Exception types raised across the library."""


class GcamPoseError(Exception):
    """Base class for all library errors."""


class NearPiRotation(GcamPoseError):
    """Rotation too close to 180 degrees for the Cayley parameterization."""


class CoincidentCameras(GcamPoseError):
    """Rig-frame normalization needs two distinct camera centers."""


class NonSquare(GcamPoseError):
    """Determinant requested for a non-square polynomial matrix."""


class NonzeroRemainder(GcamPoseError):
    """Polynomial division left a remainder beyond tolerance."""

    def __init__(self, message, remainder=None):
        super().__init__(message)
        self.remainder = remainder


class OneDimensionalFamily(GcamPoseError):
    """Equation system has a one-dimensional family of extraneous roots."""


class NoSharedTriple(GcamPoseError):
    """No three correspondences share a camera pair, so no 3x3 block constraints exist."""


class AngleAtPi(GcamPoseError):
    """Rotation-angle constraint undefined at 180 degrees."""


class PlaneThroughCenter(GcamPoseError):
    """Plane passes through the projection center; homography undefined."""


class DegenerateProjection(GcamPoseError):
    """Projective denominator vanished."""


class ExhaustedRetries(GcamPoseError):
    """Rejection sampling hit its retry cap."""


class NotZeroDimensional(GcamPoseError):
    """Equation system has infinitely many solutions."""


class RankDeficientTemplate(GcamPoseError):
    """Elimination could not isolate the quotient basis; raise expansion_degree."""


class NoRealRoots(GcamPoseError):
    """No real roots survived filtering."""


class RankCollapse(GcamPoseError):
    """Constraint matrix rank too low to recover a translation direction."""


class ScaleUnobservable(GcamPoseError):
    """Translation scale is not observable for this motion/configuration."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class InsufficientSpan(GcamPoseError):
    """Not enough correspondences, or they span too few camera pairs."""


class DegenerateInput(GcamPoseError):
    """Input correspondences are degenerate (e.g. repeated points)."""


class NoModelFound(GcamPoseError):
    """RANSAC found no hypothesis with enough inliers."""


class ZeroTranslation(GcamPoseError):
    """Direction error undefined for a near-zero translation."""


class ResampleExhausted(GcamPoseError):
    """Synthetic scene generation could not place a visible point."""
