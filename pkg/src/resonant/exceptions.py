"""Exception types raised by the library."""


class ResonantError(Exception):
    """Base class for all library errors."""


class DomainError(ResonantError, ValueError):
    """Input is well-formed but outside the domain of the operation."""


class SupportError(DomainError):
    """A distribution puts mass where its reference has none."""


class DegenerateTarget(DomainError):
    """The target is a free state, so a ratio of resource measures is undefined."""


class OverflowGuard(DomainError):
    """A type-class enumeration would exceed the configured atom cap."""


class NoFeasibleRate(DomainError):
    """Not even a single target copy can be produced at the requested error."""

    def __init__(self, message, m=0):
        super().__init__(message)
        self.m = m
        self.rate = 0.0


class ConvergenceError(ResonantError, ArithmeticError):
    """The optimal-state construction failed its verification pass."""


class IterationLimit(ConvergenceError):
    """An iterative solver hit its step cap before reaching tolerance."""
