"""Exception hierarchy used across the library."""


class GradcvError(Exception):
    """Base class for all library errors."""


class ShapeError(GradcvError, ValueError):
    """Operand shapes are inconsistent with the operation's contract."""


class ParameterError(GradcvError, ValueError):
    """A scalar/structural parameter is out of its documented range."""


class UsageError(GradcvError, RuntimeError):
    """API misuse: detached loss, mixed tapes, and similar."""


class EstimationError(GradcvError, RuntimeError):
    """A geometric estimation problem is degenerate or singular."""


class NoConsensusError(EstimationError):
    """RANSAC found no model with the minimum number of inliers."""


class DegenerateError(GradcvError, ValueError):
    """Geometrically invalid input: point at infinity, non-positive depth."""


class OptimizationError(GradcvError, RuntimeError):
    """An optimization loop produced a non-finite loss."""
