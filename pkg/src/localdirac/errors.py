"""Exception hierarchy.

Validation problems subclass ``ValueError``; numerical failures subclass
``NumericalFailure`` so callers (and the CLI exit codes) can tell them apart.
"""


class NumericalFailure(RuntimeError):
    """A computation ran but could not produce a trustworthy answer."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InsufficientMomentsError(ValueError):
    pass


class RankConditionError(NumericalFailure):
    pass


class ConvergenceError(NumericalFailure):
    pass


class AmbiguityError(NumericalFailure):
    pass


class DegenerateError(NumericalFailure):
    pass


class DensityError(NumericalFailure):
    """Local mixture density dips below zero or the sampling envelope is violated."""
