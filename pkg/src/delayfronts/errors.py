"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(RuntimeError):
    """A computation finished but failed its accuracy contract.

    Usually curable by refining a step size or enlarging a search range;
    the message says which knob to turn.
    """
