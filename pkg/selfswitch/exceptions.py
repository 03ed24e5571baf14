"""
Error hierarchy.
Every error carries the command-line exit code it maps to.
"""
from typing import Optional, Sequence


class SelfSwitchError(Exception):
    """Base class for all package errors."""
    exit_code: int = 1


# --------------------------------------------------------------------------
# Validation (exit 2)
# --------------------------------------------------------------------------

class ValidationFailure(SelfSwitchError, ValueError):
    """Inputs violate a precondition."""
    exit_code = 2


class DimensionMismatchError(ValidationFailure):
    pass


class LayoutError(ValidationFailure):
    pass


class NonHermitianError(ValidationFailure):
    pass


class InvalidFeedbackError(ValidationFailure):
    pass


class DarbouxPreconditionError(ValidationFailure):
    pass


class ScenarioError(ValidationFailure):
    pass


# --------------------------------------------------------------------------
# Numerical (exit 3)
# --------------------------------------------------------------------------

class NumericalFailure(SelfSwitchError, ArithmeticError):
    """A computation produced an unusable result."""
    exit_code = 3


class StateInvariantError(NumericalFailure):
    pass


class DomainError(NumericalFailure):
    pass


class PositivityViolation(NumericalFailure):
    """Integrated state lost positivity beyond tolerance."""

    def __init__(self, time: float, min_eigenvalue: float, threshold: float):
        self.time = time
        self.min_eigenvalue = min_eigenvalue
        self.threshold = threshold
        super().__init__(
            f"Positivity violated at t={time:.6g}: min eigenvalue {min_eigenvalue:.3e} < -{threshold:.3e}"
        )


class DegenerateNormalizationError(NumericalFailure):
    """Dressing normalization F_a(t) vanished."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"Dressing normalization vanished at t={time:.6g}")


# --------------------------------------------------------------------------
# Verification (exit 1)
# --------------------------------------------------------------------------

class VerificationFailed(SelfSwitchError):
    exit_code = 1

    def __init__(self, failed: Sequence[str], message: Optional[str] = None):
        self.failed = list(failed)
        super().__init__(message or f"{len(self.failed)} check(s) failed: {', '.join(self.failed)}")
