"""
Operator Core Module
Dense complex-Hermitian linear algebra shared by every other service.
"""
import logging
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy import linalg as sla

from selfswitch.config import settings
from selfswitch.exceptions import (
    DimensionMismatchError,
    DomainError,
    LayoutError,
    NonHermitianError,
)
from selfswitch.models.operators import (
    CompositeLayout,
    DensityState,
    Operand,
    OperatorMatrix,
    as_array,
)

logger = logging.getLogger(__name__)


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _require_same_dim(*operands: Operand) -> int:
    dims = {as_array(op).shape[0] for op in operands}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Operator dimensions differ: {sorted(dims)}")
    return dims.pop()


def _as_operator(value: Operand) -> OperatorMatrix:
    if isinstance(value, OperatorMatrix):
        return value
    if isinstance(value, DensityState):
        return value.matrix
    return OperatorMatrix(value)


def commutator(A: Operand, B: Operand) -> OperatorMatrix:
    """
    Compute [A, B] = AB − BA.

    Raises:
        DimensionMismatchError: If A and B differ in dimension
    """
    _require_same_dim(A, B)
    a, b = as_array(A), as_array(B)
    return OperatorMatrix(a @ b - b @ a)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # First non-negligible component of every column made real-positive
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        column = fixed[:, j]
        scale = np.max(np.abs(column))
        for component in column:
            if abs(component) > 1e-12 * scale:
                fixed[:, j] = column * (abs(component) / component)
                break
    return fixed


def hermitian_eigensystem(A: Operand, tol: float = settings.HERMITICITY_TOL) -> EigenSystem:
    """
    Deterministic eigendecomposition of a Hermitian operator.

    Eigenvalues come back ascending; each eigenvector's first nonzero
    component is real and positive.

    Args:
        A: Hermitian operator
        tol: Allowed relative Hermiticity defect

    Returns:
        EigenSystem with read-only arrays

    Raises:
        NonHermitianError: If A is not Hermitian within tol
    """
    op = _as_operator(A)
    if op.cached_eigensystem is not None:
        return op.cached_eigensystem
    defect = op.hermiticity_defect()
    if defect > tol:
        raise NonHermitianError(f"Operator is not Hermitian: relative defect {defect:.3e}")
    data = op.data
    values, vectors = sla.eigh(0.5 * (data + data.conj().T))
    vectors = _fix_phases(vectors)
    values.flags.writeable = False
    vectors.flags.writeable = False
    system = EigenSystem(values, vectors)
    op.cache_eigensystem(system)
    return system


def matrix_function(A: Operand, g: Callable[[float], complex]) -> OperatorMatrix:
    """
    Apply a scalar function to a Hermitian operator through its spectrum.

    Args:
        A: Hermitian operator
        g: Scalar function, evaluated on each eigenvalue

    Returns:
        V diag(g(λ)) V†

    Raises:
        DomainError: If g fails or is non-finite at an eigenvalue
    """
    system = hermitian_eigensystem(A)
    values = []
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        for eigenvalue in system.eigenvalues:
            try:
                values.append(complex(g(float(eigenvalue))))
            except (ValueError, ZeroDivisionError, OverflowError, FloatingPointError) as e:
                raise DomainError(f"Function undefined at eigenvalue {eigenvalue:.6g}: {e}") from e
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise DomainError("Function is not finite on the spectrum")
    v = system.eigenvectors
    return OperatorMatrix((v * values) @ v.conj().T)


def evolution_operator(H: Operand, s: float) -> OperatorMatrix:
    """U = exp(−isH) from the eigendecomposition of H."""
    system = hermitian_eigensystem(H)
    v = system.eigenvectors
    return OperatorMatrix((v * np.exp(-1j * s * system.eigenvalues)) @ v.conj().T)


def unitary_conjugate_exp(H: Operand, s: float, rho: DensityState) -> DensityState:
    """
    Evolve a state linearly: exp(−isH) ρ exp(isH).

    Raises:
        DimensionMismatchError: If H and ρ differ in dimension
    """
    _require_same_dim(H, rho)
    if s == 0.0:
        return rho
    u = evolution_operator(H, s).data
    evolved = u @ rho.data @ u.conj().T
    return DensityState(0.5 * (evolved + evolved.conj().T), rho.hermiticity_tol, rho.positivity_tol)


def tensor_product(A: Operand, B: Operand) -> OperatorMatrix:
    return OperatorMatrix(np.kron(as_array(A), as_array(B)))


def _factor_tensor(value: Operand, layout: CompositeLayout) -> np.ndarray:
    data = as_array(value)
    layout.check(data.shape[0])
    return data.reshape(layout.factor_dims + layout.factor_dims)


def partial_trace(
    rho: Union[DensityState, OperatorMatrix],
    layout: CompositeLayout,
    keep: Union[int, Sequence[int]],
) -> DensityState:
    """
    Reduce a state onto the kept tensor factors.

    Args:
        rho: State on the full space
        layout: Tensor structure of rho
        keep: Factor index (or indices) to keep

    Returns:
        Reduced state with the same trace

    Raises:
        LayoutError: If the layout does not fit rho or keep is out of range
    """
    kept = sorted({keep} if isinstance(keep, int) else set(keep))
    if not kept:
        raise LayoutError("At least one factor must be kept")
    for index in kept:
        layout.check_factor(index)
    tensor = _factor_tensor(rho, layout)
    for axis in reversed(range(layout.n_factors)):
        if axis not in kept:
            tensor = np.trace(tensor, axis1=axis, axis2=axis + tensor.ndim // 2)
    dim = int(np.prod([layout.factor_dims[i] for i in kept]))
    reduced = tensor.reshape(dim, dim)
    if isinstance(rho, DensityState):
        return DensityState(reduced, rho.hermiticity_tol, rho.positivity_tol)
    return DensityState(reduced)


def partial_transpose(rho: Operand, layout: CompositeLayout, which: int) -> OperatorMatrix:
    """
    Transpose one tensor factor.

    Raises:
        LayoutError: If the layout does not fit rho or which is out of range
    """
    layout.check_factor(which)
    tensor = _factor_tensor(rho, layout)
    n = layout.n_factors
    tensor = np.swapaxes(tensor, which, which + n)
    return OperatorMatrix(tensor.reshape(layout.dim, layout.dim))


def permute_factors(A: Operand, layout: CompositeLayout, order: Sequence[int]) -> OperatorMatrix:
    """Reorder tensor factors so that new factor i is old factor order[i]."""
    n = layout.n_factors
    if sorted(order) != list(range(n)):
        raise LayoutError(f"Order {list(order)} is not a permutation of {n} factors")
    tensor = _factor_tensor(A, layout)
    tensor = np.transpose(tensor, list(order) + [n + i for i in order])
    return OperatorMatrix(tensor.reshape(layout.dim, layout.dim))


def embed_operator(A: Operand, indices: Sequence[int], dim: int) -> OperatorMatrix:
    """Place A on the given basis indices of a dim-dimensional space."""
    data = as_array(A)
    if len(indices) != data.shape[0]:
        raise DimensionMismatchError(f"{len(indices)} indices for an operator of dimension {data.shape[0]}")
    if len(set(indices)) != len(indices) or min(indices) < 0 or max(indices) >= dim:
        raise DimensionMismatchError(f"Indices {list(indices)} do not fit dimension {dim}")
    out = np.zeros((dim, dim), dtype=complex)
    out[np.ix_(indices, indices)] = data
    return OperatorMatrix(out)


def spectrum_deviation(A: DensityState, B: DensityState) -> float:
    """Largest eigenvalue difference, relative to the spectral radius of A."""
    _require_same_dim(A, B)
    scale = max(float(np.max(np.abs(A.eigenvalues))), 1e-300)
    return float(np.max(np.abs(A.eigenvalues - B.eigenvalues))) / scale
