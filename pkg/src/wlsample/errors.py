"""Exception hierarchy shared by all modules."""


class WLSError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WLSError, ValueError):
    """A point lies outside the domain of the function space."""


class SingularPointError(WLSError, ValueError):
    """The Christoffel denominator vanishes at a point."""


class ParameterError(WLSError, ValueError):
    """An argument violates a documented precondition."""


class InconsistencyError(WLSError):
    """Exact data disagrees with quadrature, or round-off is out of bounds."""


class SamplingStallError(WLSError):
    """A rejection loop exceeded its iteration cap."""


class ConditioningFailureError(WLSError):
    """No draw met the Gram conditioning event within the redraw budget."""


class MatrixError(WLSError, ValueError):
    """A matrix is not Hermitian (or not square) within tolerance."""


class ShapeError(WLSError, ValueError):
    """Array lengths do not agree."""


class SingularSystemError(WLSError):
    """The Gram matrix is singular or numerically close to it."""


class ReconstructionFailure(SingularSystemError):
    """Least-squares reconstruction impossible because the Gram is singular."""


class PreconditionError(WLSError, ValueError):
    """Input framing or precondition of a split/sparsifier does not hold."""


class SizeError(WLSError, ValueError):
    """Problem too large for the requested (exhaustive) strategy."""


class SplitSearchFailure(WLSError):
    """A heuristic split search exhausted its budget without a verified split."""

    def __init__(self, message, level=None, subset=None, candidates=0):
        super().__init__(message)
        self.level = level
        self.subset = subset
        self.candidates = candidates


class SparsificationFailure(WLSError):
    """A barrier step found no admissible vector."""


class HarnessError(WLSError):
    """Every Monte Carlo trial failed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
