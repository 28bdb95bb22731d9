"""Exception types shared across the package."""


class QnsolveError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrixError(QnsolveError):
    """A pivot fell below the singularity threshold during factorization."""


class ZeroVectorError(QnsolveError):
    """A vector that must be nonzero has (numerically) zero norm."""


class ZeroStepError(QnsolveError):
    """The step between consecutive iterates is too small to use."""


class DuplicatePointsError(QnsolveError):
    """Two points expected to be distinct coincide up to the zero floor."""


class UnknownProblemError(QnsolveError):
    """No registered test problem under the requested name."""


class DimensionNotSupportedError(QnsolveError):
    """The requested dimension is not admissible for this problem family."""


class NonFiniteResultError(QnsolveError):
    """A residual evaluation produced NaN or Inf entries."""


class UpdateSkipped(QnsolveError):
    """Control-flow signal: no admissible scaling keeps the update nonsingular,
    so the caller should keep the current Jacobian approximation."""


class LineSearchFailedError(QnsolveError):
    """Backtracking reached the minimum step fraction without acceptance."""


class InvalidSuiteError(QnsolveError):
    """The benchmark suite definition is empty or malformed."""


class IncompleteGridError(QnsolveError):
    """Benchmark records do not cover a full method-by-problem grid."""
