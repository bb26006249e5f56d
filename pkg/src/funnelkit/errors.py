class FunnelError(Exception):
    """Base class for errors raised by funnelkit."""


class EmptySet(FunnelError, ValueError):
    """An operation needs a nonempty set."""


class GridMismatch(FunnelError, ValueError):
    pass


class CFLViolation(FunnelError, ValueError):
    """The time step is too large for the speeds involved."""


class SupportOverflow(FunnelError, RuntimeError):
    """A solution or funnel reached the edge of the computational grid."""


class NotTubular(FunnelError, ValueError):
    pass


class PreconditionError(FunnelError, ValueError):
    """Input data violate the assumptions a check relies on."""
