"""Exception types raised by the solvers."""


class AdjquatError(Exception):
    """Base class for all library errors."""


class NonConvergence(AdjquatError):
    """Eigenvalue solver could not reach the residual tolerance."""


class NotUnit(AdjquatError, ValueError):
    """A quaternion (or half-angle pair) is not normalized."""


class AxisNotUnit(AdjquatError, ValueError):
    """A rotation axis is not a unit vector."""


class NotOnCircle(AdjquatError, ValueError):
    """A (cos, sin) pair does not lie on the unit circle."""


class DegenerateAdjugate(AdjquatError):
    """Adjugate collapsed toward zero (repeated maximal eigenvalue)."""


class DegenerateInput(AdjquatError):
    """Measured matrix carries no rotational content."""


class DegenerateData(AdjquatError):
    """Point data does not determine a rotation."""


class DegenerateReference(DegenerateData):
    """Reference cloud Gram determinant vanishes (collinear or planar cloud)."""


class AmbiguousPose(DegenerateData):
    """Pose data leaves the rotation undetermined."""


class ShapeMismatch(AdjquatError, ValueError):
    """Array shapes are incompatible."""


class CameraInsideCloud(AdjquatError):
    """A perspective depth is near zero or changes sign across the cloud."""


class DepthDegenerate(AdjquatError):
    """Focal-length equation has a vanishing denominator."""


class NoRootInBracket(AdjquatError):
    """No stationary point of the perspective loss inside the search bracket."""


class ParseError(AdjquatError, ValueError):
    """Malformed point-cloud file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(AdjquatError, ValueError):
    """Point-cloud file has an unsupported column layout."""
