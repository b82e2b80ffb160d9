"""Exception types shared across the package."""


class LazardError(Exception):
    """Base class for every error raised by this package."""


class ModulusMismatch(LazardError, ValueError):
    pass


class ContainmentError(LazardError, ValueError):
    """Raised when a span expected to be a submodule is not contained in the other.

    ``witness`` holds a basis vector of the smaller span that is not a member.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DenominatorError(LazardError, ArithmeticError):
    """A rational number with ``p`` in its denominator was forced into ``Z/p^k``."""


class UniformityError(LazardError, ValueError):
    pass


class RingValidationError(LazardError, ValueError):
    """Structure constants failed validation.

    ``triple`` is the first violating 1-based basis triple when the failure is
    a Jacobi residual, ``pointer`` a JSON pointer for schema failures.
    """

    def __init__(self, message, triple=None, pointer=None):
        super().__init__(message)
        self.triple = triple
        self.pointer = pointer


class WindowError(LazardError, ValueError):
    pass


class BudgetExceeded(LazardError, RuntimeError):
    """A desk-scale budget was exceeded; no partial result is returned."""

    def __init__(self, message, needed=None, budget=None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget
