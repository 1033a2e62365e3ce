"""Exception hierarchy shared by all modules."""


class RmpcError(Exception):
    """Base class for every error raised by this package."""


class NumericalFailure(RmpcError):
    """The LP solver could not make progress (ill-conditioning, iteration cap)."""


class DimensionMismatch(RmpcError, ValueError):
    pass


class ShapeError(RmpcError, ValueError):
    pass


class UnboundedSet(RmpcError):
    """A set was unbounded in a direction where a finite bound is required."""


class DimensionCap(RmpcError):
    pass


class ExplosionLimit(RmpcError):
    """Fourier-Motzkin elimination produced too many intermediate rows."""


class DegenerateImage(RmpcError):
    """An affine image of a polytope is lower dimensional.

    The flat image is still available as ``image`` together with the
    equality description ``flat`` (rows ``a`` with ``a @ w == b``).
    """

    def __init__(self, message, image=None, flat=None):
        super().__init__(message)
        self.image = image
        self.flat = flat


class NotConverged(RmpcError):
    """A fixed-point iteration hit its iteration cap.

    ``result`` carries the last iterate; it is an outer bound of the true
    invariant set and must not be used as a terminal set without care.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InfeasibleModel(RmpcError):
    """The finite-horizon problem has no feasible solution."""


class InfeasibleAtStep(RmpcError):
    """The receding-horizon problem became infeasible during a closed-loop run."""

    def __init__(self, step, message="", trace=None):
        super().__init__(message or f"optimal control problem infeasible at step {step}")
        self.step = step
        self.trace = trace
