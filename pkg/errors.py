"""Exceptions raised by the spline library; each carries the CLI exit code it maps to."""


class TrigSplineError(Exception):
    """Base class for every library error"""
    exit_code = 1


class ValidationError(TrigSplineError):
    """Input does not satisfy an operation's preconditions"""
    exit_code = 2


class NumericalError(TrigSplineError):
    """The computation itself cannot deliver a trustworthy result"""
    exit_code = 3


# Validation errors

class EvenN(ValidationError):
    pass


class TooSmall(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class AllZeroParams(ValidationError):
    pass


class FundamentalRequiresEqualParams(ValidationError):
    pass


class DerivativeOrderTooHigh(ValidationError):
    pass


class OddPanels(ValidationError):
    pass


class PreconditionViolation(ValidationError):
    pass


# Numerical errors

class DegenerateFactor(NumericalError):
    pass


class TailBudgetExceeded(NumericalError):
    """Raised when the certified tail length would exceed the term budget"""

    def __init__(self, message: str, required_terms: float = float("inf"), max_terms: int = 0):
        super().__init__(message)
        self.required_terms = required_terms
        self.max_terms = max_terms


class SingularSystem(NumericalError):
    pass


class NoWitnessFound(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass
