"""Exception types shared across the package."""


class WfMaxwellError(Exception):
    """Base class for all package-specific errors."""


class NonManifoldMeshError(WfMaxwellError):
    """A face is shared by more than two tetrahedra."""


class GeometryInconsistencyError(WfMaxwellError):
    """A point flagged as boundary does not match any box feature."""


class DegenerateElementError(WfMaxwellError):
    """A tetrahedron has non-positive or numerically vanishing volume."""


class InvalidSplitError(WfMaxwellError):
    """A face split point falls outside the open interior of its face."""


class UnsupportedDegreeError(WfMaxwellError):
    """Requested polynomial or quadrature degree is out of the supported range."""


class NotPositiveDefiniteError(WfMaxwellError):
    """A matrix required to be positive definite failed factorization."""


class ProblemTooLargeError(WfMaxwellError):
    """Problem dimension exceeds the configured dense-solve cap."""

    def __init__(self, message, dim=None, cap=None):
        super().__init__(message)
        self.dim = dim
        self.cap = cap


class InsufficientSpectrumError(WfMaxwellError):
    """Fewer computed nonzero eigenvalues than requested exact values."""


class PipelineCheckError(WfMaxwellError):
    """An intermediate validation failed during an experiment run."""
