"""Exception hierarchy shared by all modules."""


class ILCError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ILCError, ValueError):
    pass


class NodeSingularity(ILCError):
    """Integrand is non-finite at a quadrature node."""


class NoConvergence(ILCError):
    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class BranchCutError(ILCError):
    """A square-root weight was evaluated on its branch cut (bad contour radius)."""


class InternalError(ILCError):
    pass


class BranchLost(ILCError):
    """Root continuation jumped to a different algebraic branch."""


class PrecisionExhausted(ILCError):
    pass


class BranchError(ILCError):
    """Negative radicand when solving the sigma form for h''."""


class IntegrationFailed(ILCError):
    pass


class DegenerateExponent(ILCError):
    """sigma at 0 or 1, where the t -> 1 expansions need their limit forms."""


class FitFailed(ILCError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
