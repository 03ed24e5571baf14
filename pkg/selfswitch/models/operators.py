"""
Operator value types.
Dense complex matrices, density states and tensor-product layouts.
"""
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Union

import numpy as np
from scipy import linalg as sla

from selfswitch.config import settings
from selfswitch.exceptions import DimensionMismatchError, LayoutError, StateInvariantError

if TYPE_CHECKING:
    from selfswitch.services.linalg import EigenSystem


class OperatorMatrix:
    """Immutable dense complex square matrix."""

    __slots__ = ("_data", "_eigensystem")

    def __init__(self, entries):
        data = np.array(entries, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatchError(f"Operator must be square, got shape {data.shape}")
        if data.shape[0] == 0:
            raise DimensionMismatchError("Operator dimension must be positive")
        if not np.all(np.isfinite(data)):
            raise StateInvariantError("Operator has non-finite entries")
        data.flags.writeable = False
        self._data = data
        self._eigensystem = None

    @classmethod
    def identity(cls, dim: int) -> "OperatorMatrix":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "OperatorMatrix":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def diagonal(cls, values: Iterable[complex]) -> "OperatorMatrix":
        return cls(np.diag(np.asarray(list(values), dtype=complex)))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def cached_eigensystem(self) -> Optional["EigenSystem"]:
        """Eigen-decomposition stored by `cache_eigensystem`, if any."""
        return self._eigensystem

    def cache_eigensystem(self, system: "EigenSystem") -> None:
        """Remember the eigen-decomposition of this (immutable) matrix."""
        if system.eigenvalues.shape != (self.dim,):
            raise DimensionMismatchError(f"Eigensystem of size {system.eigenvalues.size} for dim {self.dim}")
        self._eigensystem = system

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self._data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self._data))

    def hermiticity_defect(self) -> float:
        """‖M − M†‖_F relative to ‖M‖_F (0 for the zero matrix)."""
        norm = self.frobenius_norm()
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(self._data - self._data.conj().T)) / norm

    def is_hermitian(self, tol: float = settings.HERMITICITY_TOL) -> bool:
        return self.hermiticity_defect() <= tol

    def allclose(self, other: "Operand", atol: float) -> bool:
        return bool(np.linalg.norm(self._data - as_array(other)) <= atol)

    def __add__(self, other: "Operand") -> "OperatorMatrix":
        return OperatorMatrix(self._data + as_array(other))

    def __sub__(self, other: "Operand") -> "OperatorMatrix":
        return OperatorMatrix(self._data - as_array(other))

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(-self._data)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self._data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self._data / scalar)

    def __matmul__(self, other: "Operand") -> "OperatorMatrix":
        return OperatorMatrix(self._data @ as_array(other))

    def __repr__(self) -> str:
        return f"OperatorMatrix(dim={self.dim})"


class DensityState:
    """
    Hermitian positive-semidefinite operator with checked invariants.

    The trace only has to be real and positive; states are not normalized.

    Raises:
        StateInvariantError: If Hermiticity, positivity or the trace condition fails
    """

    __slots__ = ("_matrix", "hermiticity_tol", "positivity_tol", "_eigenvalues")

    def __init__(
        self,
        matrix: "Operand",
        hermiticity_tol: float = settings.HERMITICITY_TOL,
        positivity_tol: float = settings.POSITIVITY_TOL,
    ):
        self._matrix = matrix if isinstance(matrix, OperatorMatrix) else OperatorMatrix(as_array(matrix))
        self.hermiticity_tol = hermiticity_tol
        self.positivity_tol = positivity_tol
        self._eigenvalues: Optional[np.ndarray] = None
        self._check()

    def _check(self) -> None:
        data = self._matrix.data
        norm = self._matrix.frobenius_norm()
        defect = self._matrix.hermiticity_defect()
        if defect > self.hermiticity_tol:
            raise StateInvariantError(f"State is not Hermitian: relative defect {defect:.3e}")
        trace = np.trace(data)
        if abs(trace.imag) > self.hermiticity_tol * max(norm, 1.0):
            raise StateInvariantError(f"State trace is not real: {trace}")
        if trace.real <= 0.0:
            raise StateInvariantError(f"State trace must be positive, got {trace.real:.6g}")
        lowest = float(self.eigenvalues[0])
        if lowest < -self.positivity_tol * norm:
            raise StateInvariantError(f"State is not positive: min eigenvalue {lowest:.3e}")

    @property
    def matrix(self) -> OperatorMatrix:
        return self._matrix

    @property
    def data(self) -> np.ndarray:
        return self._matrix.data

    @property
    def dim(self) -> int:
        return self._matrix.dim

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Ascending spectrum of the Hermitian part."""
        if self._eigenvalues is None:
            data = self.data
            values = sla.eigvalsh(0.5 * (data + data.conj().T))
            values.flags.writeable = False
            self._eigenvalues = values
        return self._eigenvalues

    def frobenius_norm(self) -> float:
        return self._matrix.frobenius_norm()

    def normalized(self) -> "DensityState":
        return DensityState(self.data / self.trace, self.hermiticity_tol, self.positivity_tol)

    def __repr__(self) -> str:
        return f"DensityState(dim={self.dim}, trace={self.trace:.6g})"


@dataclass(frozen=True)
class CompositeLayout:
    """Ordered tensor factor dimensions; factor 0 is the slowest index."""
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d <= 0 for d in dims):
            raise LayoutError(f"Factor dimensions must be positive, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def check(self, dim: int) -> None:
        """
        Ensure the layout fits a matrix of the given dimension.

        Raises:
            LayoutError: If the factor product differs from dim
        """
        if self.dim != dim:
            raise LayoutError(f"Layout {self.factor_dims} has dimension {self.dim}, matrix has {dim}")

    def check_factor(self, index: int) -> None:
        if not 0 <= index < self.n_factors:
            raise LayoutError(f"Factor index {index} outside layout {self.factor_dims}")


Operand = Union[OperatorMatrix, DensityState, np.ndarray]


def as_array(value: Operand) -> np.ndarray:
    """Raw complex array behind any operand."""
    if isinstance(value, (OperatorMatrix, DensityState)):
        return value.data
    return np.asarray(value, dtype=complex)


def pauli(name: str) -> OperatorMatrix:
    """Pauli matrix 'x', 'y' or 'z'."""
    table = {
        "x": [[0, 1], [1, 0]],
        "y": [[0, -1j], [1j, 0]],
        "z": [[1, 0], [0, -1]],
    }
    if name not in table:
        raise ValueError(f"Unknown Pauli matrix '{name}'")
    return OperatorMatrix(table[name])
