"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the body (or otherwise violates a domain precondition)."""


class DegenerateChordError(RuntimeError):
    """A chord collapsed to (numerically) zero length."""


class StepError(RuntimeError):
    """A Markov-chain step could not be completed."""


class PreconditionError(ValueError):
    """A documented statistical precondition of an estimator is not met."""


class NumericalError(RuntimeError):
    """Underflow, instability, rejection-cap overflow or degenerate data."""
