"""
Feedback polynomial f(ρ) = a₀ + a₁ρ + … + aₙρⁿ.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from selfswitch.exceptions import ValidationFailure

CLASSIFICATION_TOL = 1e-12


class FeedbackClass(str, Enum):
    STRICT = "strict"
    PROPORTIONAL = "proportional"
    INVALID = "invalid"


@dataclass(frozen=True)
class FeedbackClassification:
    kind: FeedbackClass
    scale: float  # f(1); the time-reparametrization factor for PROPORTIONAL

    @property
    def is_valid(self) -> bool:
        return self.kind is not FeedbackClass.INVALID


class FeedbackPolynomial:
    """Real polynomial feedback with its pure-state consistency class."""

    def __init__(self, coefficients: Sequence[float]):
        coeffs = tuple(float(c) for c in coefficients)
        if not coeffs:
            raise ValidationFailure("Feedback polynomial needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ValidationFailure(f"Feedback coefficients must be finite, got {coeffs}")
        self.coefficients: tuple[float, ...] = coeffs
        self.is_affine: bool = all(c == 0.0 for c in coeffs[2:])
        self.classification: FeedbackClassification = self._classify()

    @classmethod
    def quadratic(cls, h: float) -> "FeedbackPolynomial":
        """f(ρ) = (1 − h)ρ + hρ²."""
        return cls((0.0, 1.0 - h, h))

    @classmethod
    def square(cls) -> "FeedbackPolynomial":
        return cls((0.0, 0.0, 1.0))

    @property
    def degree(self) -> int:
        nonzero = [i for i, c in enumerate(self.coefficients) if c != 0.0]
        return nonzero[-1] if nonzero else 0

    def value(self, x: float) -> float:
        return float(npoly.polyval(x, self.coefficients))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evaluate f on a matrix by Horner's scheme."""
        identity = np.eye(rho.shape[0], dtype=complex)
        result = self.coefficients[-1] * identity
        for c in reversed(self.coefficients[:-1]):
            result = result @ rho + c * identity
        return result

    def _classify(self) -> FeedbackClassification:
        at_zero = self.value(0.0)
        at_one = self.value(1.0)
        if abs(at_zero) > CLASSIFICATION_TOL:
            return FeedbackClassification(FeedbackClass.INVALID, at_one)
        if abs(at_one - 1.0) <= CLASSIFICATION_TOL:
            return FeedbackClassification(FeedbackClass.STRICT, 1.0)
        if abs(at_one) > CLASSIFICATION_TOL:
            return FeedbackClassification(FeedbackClass.PROPORTIONAL, at_one)
        return FeedbackClassification(FeedbackClass.INVALID, at_one)

    def __repr__(self) -> str:
        return f"FeedbackPolynomial({list(self.coefficients)}, {self.classification.kind.value})"
