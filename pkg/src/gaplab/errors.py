"""Exception hierarchy shared by all gaplab modules."""


class GaplabError(Exception):
    """Base class for all errors raised by this package."""


class DescriptorMismatchError(GaplabError):
    """Two objects live on different groups (or group/action mismatch)."""


class UnsupportedKindError(GaplabError):
    """The requested operation is not defined for this group/action kind."""


class PreconditionError(GaplabError):
    """A documented precondition of an operation was violated by the caller."""


class ResourceLimitError(GaplabError):
    """A support/size cap was exceeded; the message names the cap."""


class ConstructionError(GaplabError):
    """An action space could not be built from the given parameters."""


class GridResolutionError(GaplabError):
    """The discretization grid is too coarse for the requested construction."""


class ConvergenceError(GaplabError):
    """An iterative solver did not reach its tolerance within its budget."""

    def __init__(self, message: str, last_residual: float | None = None):
        super().__init__(message)
        self.last_residual = last_residual


class ContractError(GaplabError):
    """An operator handle violated its declared contract (shape, adjointness)."""


class InternalConsistencyError(GaplabError):
    """A certified inequality failed; indicates a bug, not a user error."""
