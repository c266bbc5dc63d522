"""Exception types shared across the package."""


class MinklabError(Exception):
    """Base class for all errors raised by minklab."""


class DimensionMismatchError(MinklabError):
    pass


class OriginNotInteriorError(MinklabError):
    pass


class UnboundedBodyError(MinklabError):
    pass


class DegenerateBodyError(MinklabError):
    pass


class DimensionCapError(MinklabError):
    """Exact enumeration (hulls, conversions, fan volumes) is capped at dim 8."""


class NotPolytopeError(MinklabError):
    pass


class NonSmoothBodyError(MinklabError):
    """Raised when an operation needs gauge gradients the body cannot supply."""


class SymmetryRequiredError(MinklabError):
    pass


class GlidingOnsetError(MinklabError):
    """Reflection direction tangent to the momentum body: gliding regime suspected."""


class NumericalFailureError(MinklabError):
    pass


class OptimizerConvergenceError(MinklabError):
    """No optimizer start converged; carries the best candidate seen so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BodySpecError(MinklabError):
    """Invalid body description; `path` locates the offending JSON node."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
