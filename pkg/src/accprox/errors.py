"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the domain an oracle or operation accepts."""


class ParameterError(ValueError):
    """Solver parameters violate their admissible ranges."""


class EstimationError(RuntimeError):
    """Iterative estimation failed to converge within its cap."""


class NonconvergenceError(RuntimeError):
    """A solver exhausted its iteration budget.

    Carries whatever partial state was available at the point of failure
    so callers can inspect the trajectory.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
