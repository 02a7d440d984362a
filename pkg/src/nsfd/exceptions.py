"""Exception hierarchy shared by every module of the package."""


class NSFDError(Exception):
    """Base class for all errors raised by :mod:`nsfd`."""


class UsageError(NSFDError, ValueError):
    """Invalid arguments: wrong dimension, violated precondition, bad config."""


class HyperbolicityError(UsageError):
    """Condition (C2) fails: an equilibrium has an eigenvalue on the imaginary axis."""


class NumericalDomainError(NSFDError, ArithmeticError):
    """A right-hand side or scheme produced a non-finite or inadmissible value.

    ``step`` is set by the integrators to the index of the failing step.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConvergenceError(NSFDError, ArithmeticError):
    """An iterative algorithm ran out of its iteration budget."""
