"""Exception hierarchy shared by all modules."""


class FrozenSpectrumError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FrozenSpectrumError, ValueError):
    """An argument lies outside the set or segment it must belong to."""


class ValidationError(FrozenSpectrumError, ValueError):
    """Input data violates a documented invariant or precondition."""


class NumericError(FrozenSpectrumError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy.

    ``diagnostics`` carries whatever intermediate data is useful for
    understanding the failure (iterates, residuals, ladders, ...).
    """

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class IncompleteSpectrumError(NumericError):
    """Argument-principle certification found more zeros than were located."""


class CommonZeroError(ValidationError):
    """c2 and s share a zero, so the coefficient formulas are singular."""
