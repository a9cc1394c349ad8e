"""Exception types shared across the solver stack."""


class SecloopError(Exception):
    """Base class for all library errors."""


class DegenerateChannelError(SecloopError):
    """A legitimate gain exactly equals its eavesdropping counterpart.

    The case taxonomy assumes strict inequalities; callers that hit this may
    perturb the offending gain by one ulp and retry.
    """


class InfeasibleError(SecloopError):
    """No allocation satisfies the constraint set of the current subproblem."""


class ConvergenceError(SecloopError):
    """An iterative solver exceeded its iteration budget."""

    def __init__(self, message: str, bound_gap: float | None = None):
        super().__init__(message)
        self.bound_gap = bound_gap


class ScenarioFormatError(SecloopError):
    """A scenario or spec file could not be parsed."""
