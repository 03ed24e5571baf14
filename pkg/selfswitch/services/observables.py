"""
Observables Module
Statistical quantities extracted from states: entropies, separability,
purification, proposition probabilities, uncertainty bounds and
position-space densities.
"""
import logging
import math
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import optimize
from scipy.special import entr

from selfswitch.config import settings
from selfswitch.exceptions import DomainError, LayoutError, StateInvariantError, ValidationFailure
from selfswitch.models.operators import CompositeLayout, DensityState, Operand, OperatorMatrix, as_array
from selfswitch.models.parameters import SQRT5, MultiSpeciesConfig, SwitchingProfile
from selfswitch.services.linalg import _require_same_dim, hermitian_eigensystem, partial_trace, partial_transpose
from selfswitch.services.oscillator import OscillatorBasis
from selfswitch.services.solutions import (
    ORGANISM_LAYOUT,
    PARTICLE_FACTOR,
    SQRT7,
    SQRT15,
    organism_solution,
    species_layout,
    species_reduced_states,
    switching_functions,
)

logger = logging.getLogger(__name__)

REDUCED_EIGENVALUE_TOL = 1e-10
QUADRATURE_TOL = 1e-6


def _trace(rho: Operand) -> float:
    trace = float(np.trace(as_array(rho)).real)
    if not trace > 0.0:
        raise DomainError(f"State trace must be positive, got {trace:.6g}")
    return trace


# ---------------------------------------------------------------------------
# Propositions
# ---------------------------------------------------------------------------

class Proposition:
    """
    Yes/no question represented by an orthogonal projector.

    Raises:
        ValidationFailure: If P is not Hermitian and idempotent within PROJECTOR_TOL
    """

    def __init__(self, projector: Operand, tol: float = settings.PROJECTOR_TOL):
        matrix = projector if isinstance(projector, OperatorMatrix) else OperatorMatrix(as_array(projector))
        data = matrix.data
        if np.linalg.norm(data - data.conj().T) > tol:
            raise ValidationFailure("Proposition is not Hermitian")
        if np.linalg.norm(data @ data - data) > tol:
            raise ValidationFailure("Proposition is not idempotent")
        self.projector = matrix

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> "Proposition":
        """Rank-one proposition |v⟩⟨v| / ⟨v|v⟩."""
        v = np.asarray(vector, dtype=complex)
        norm2 = float(np.vdot(v, v).real)
        if norm2 == 0.0:
            raise ValidationFailure("Proposition vector must be nonzero")
        return cls(np.outer(v, v.conj()) / norm2)

    @property
    def dim(self) -> int:
        return self.projector.dim

    def commutes_with(self, other: "Proposition", tol: float = settings.PROJECTOR_TOL) -> bool:
        p, q = self.projector.data, other.projector.data
        return bool(np.linalg.norm(p @ q - q @ p) <= tol)


def species_propositions(cfg: MultiSpeciesConfig) -> tuple[Proposition, Proposition]:
    """
    The two first-species propositions whose averages follow F and F₁.

    P asks for the superposition of levels 0 and 2, P₁ for levels 0 and 1.
    """
    dim = species_layout(cfg).factor_dims[0]
    e0, e1, e2 = np.eye(dim)[:3]
    return Proposition.from_vector(e0 + e2), Proposition.from_vector(e0 + e1)


def proposition_probability(P: Proposition, rho: Operand) -> float:
    """Tr(Pρ) / Tr ρ."""
    _require_same_dim(P.projector, rho)
    return float(np.trace(P.projector.data @ as_array(rho)).real) / _trace(rho)


def uncertainty_bound(P: Proposition, P1: Proposition, rho: Operand) -> float:
    """½ |Tr([P, P₁]ρ) / Tr ρ|."""
    _require_same_dim(P.projector, P1.projector, rho)
    p, q = P.projector.data, P1.projector.data
    return 0.5 * abs(np.trace((p @ q - q @ p) @ as_array(rho))) / _trace(rho)


class UncertaintyTerms(NamedTuple):
    delta_p: float
    delta_p1: float
    bound: float

    @property
    def product(self) -> float:
        return self.delta_p * self.delta_p1

    @property
    def satisfied(self) -> bool:
        return self.product >= self.bound - 1e-12


def uncertainty_terms(P: Proposition, P1: Proposition, rho: Operand) -> UncertaintyTerms:
    """ΔP = √(p − p²), ΔP₁ and the commutator bound they must jointly exceed."""
    p = proposition_probability(P, rho)
    p1 = proposition_probability(P1, rho)
    return UncertaintyTerms(
        math.sqrt(max(p - p * p, 0.0)),
        math.sqrt(max(p1 - p1 * p1, 0.0)),
        uncertainty_bound(P, P1, rho),
    )


class SpeciesObservables(NamedTuple):
    p: float
    p1: float
    terms: UncertaintyTerms


def species_observables(cfg: MultiSpeciesConfig, t: float) -> SpeciesObservables:
    """Probabilities of both propositions and the uncertainty terms on the first-species state."""
    reduced, _ = species_reduced_states(cfg, t)
    P, P1 = species_propositions(cfg)
    return SpeciesObservables(
        proposition_probability(P, reduced),
        proposition_probability(P1, reduced),
        uncertainty_terms(P, P1, reduced),
    )


def switching_probabilities(t: Union[float, np.ndarray], profile: SwitchingProfile) -> tuple:
    """
    Closed forms of p, p₁ and the uncertainty bound for the worked example.

    p = ¼(9 + √5 + 8F/3)/(15 + √5), p₁ = ¼(15 + √5 + 8F₁/3)/(15 + √5) and
    bound = |√5(F + F₀) − (3 + √5)F₁| / (12(15 + √5)).
    """
    F, F0, F1 = switching_functions(t, profile)
    norm = 15.0 + SQRT5
    p = 0.25 * (9.0 + SQRT5 + 8.0 * F / 3.0) / norm
    p1 = 0.25 * (15.0 + SQRT5 + 8.0 * F1 / 3.0) / norm
    bound = np.abs(SQRT5 * (F + F0) - (3.0 + SQRT5) * F1) / (12.0 * norm)
    return p, p1, bound


# ---------------------------------------------------------------------------
# Entropies and reductions
# ---------------------------------------------------------------------------

def von_neumann_entropy(rho: Operand) -> float:
    """
    S = −Σ p ln p over the spectrum of ρ / Tr ρ.

    Raises:
        DomainError: If the trace is not positive
    """
    trace = _trace(rho)
    state = rho if isinstance(rho, DensityState) else DensityState(rho)
    probabilities = np.clip(state.eigenvalues / trace, 0.0, None)
    return float(np.sum(entr(probabilities)))


def reduced_entropies(rho: DensityState, layout: CompositeLayout) -> list[float]:
    """Entropy of every single-factor reduction, in factor order."""
    return [von_neumann_entropy(partial_trace(rho, layout, i)) for i in range(layout.n_factors)]


class ReducedEigenvalues(NamedTuple):
    particle1: tuple[float, float]
    particle2: tuple[float, float]


def reduced_eigenvalue_curves(t: float, verify: bool = True) -> ReducedEigenvalues:
    """
    Eigenvalues of the normalized one-particle states of the organism.

    p±(1) = ½ ± (√15 − √7)/20·tanh 2t and p±(2) = ½ ± √(26 + 2√105)/(40 cosh 2t).

    Args:
        t: Time
        verify: Compare with partial traces of the dressed state

    Raises:
        StateInvariantError: If the partial traces disagree beyond 1e-10
    """
    spread1 = (SQRT15 - SQRT7) / 20.0 * math.tanh(2.0 * t)
    spread2 = math.sqrt(26.0 + 2.0 * math.sqrt(105.0)) / (40.0 * math.cosh(2.0 * t))
    curves = ReducedEigenvalues((0.5 - abs(spread1), 0.5 + abs(spread1)), (0.5 - spread2, 0.5 + spread2))
    if verify:
        state = organism_solution(t)
        for particle, expected in ((1, curves.particle1), (2, curves.particle2)):
            reduced = partial_trace(state, ORGANISM_LAYOUT, PARTICLE_FACTOR[particle])
            measured = reduced.eigenvalues / reduced.trace
            deviation = float(np.max(np.abs(measured - np.asarray(expected))))
            if deviation > REDUCED_EIGENVALUE_TOL:
                raise StateInvariantError(
                    f"Particle {particle} eigenvalues deviate by {deviation:.3e} from the closed form at t={t}"
                )
    return curves


def organism_entropies(t: float) -> tuple[float, float]:
    """(S₁, S₂) of the two particles at time t."""
    state = organism_solution(t)
    return (
        von_neumann_entropy(partial_trace(state, ORGANISM_LAYOUT, PARTICLE_FACTOR[1])),
        von_neumann_entropy(partial_trace(state, ORGANISM_LAYOUT, PARTICLE_FACTOR[2])),
    )


def _particle2_deficit(t: float) -> float:
    lower, upper = reduced_eigenvalue_curves(t, verify=False).particle2
    return math.log(2.0) - float(entr(lower) + entr(upper))


def organism_lifetime() -> float:
    """
    Full width at half maximum of the particle-2 entropy deficit ln 2 − S₂(t).

    The deficit is even in t and peaks at t = 0.
    """
    half = _particle2_deficit(0.0) / 2.0
    crossing = optimize.brentq(lambda t: _particle2_deficit(t) - half, 0.0, 10.0, xtol=1e-13)
    return 2.0 * crossing


# ---------------------------------------------------------------------------
# Separability and purification
# ---------------------------------------------------------------------------

class PPTResult(NamedTuple):
    positive: bool
    min_eigenvalue: float


def ppt_is_positive(rho: DensityState, layout: CompositeLayout, tol: float = settings.POSITIVITY_TOL) -> PPTResult:
    """
    Peres-Horodecki test on a two-factor state.

    The state is normalized by its trace; the partial transpose on the
    second factor must have minimum eigenvalue ≥ −tol·‖ρ/Tr ρ‖_F.

    Raises:
        LayoutError: If the layout does not have exactly two factors
    """
    if layout.n_factors != 2:
        raise LayoutError(f"PPT test needs a two-factor layout, got {layout.factor_dims}")
    normalized = as_array(rho) / _trace(rho)
    transposed = partial_transpose(normalized, layout, 1)
    lowest = float(hermitian_eigensystem(transposed).eigenvalues[0])
    return PPTResult(lowest >= -tol * float(np.linalg.norm(normalized)), lowest)


def purify(rho: DensityState) -> np.ndarray:
    """
    Purification |Ψ⟩ = Σ_e √p_e |e⟩_env ⊗ |e⟩ of the normalized state.

    The environment is factor 0 and uses the standard basis, with e = 0
    attached to the largest eigenvalue; keeping factor 1 of |Ψ⟩⟨Ψ| under
    CompositeLayout((d, d)) recovers ρ / Tr ρ.

    Raises:
        StateInvariantError: If ρ has a negative eigenvalue beyond tolerance
    """
    state = rho if isinstance(rho, DensityState) else DensityState(rho)
    system = hermitian_eigensystem(state.matrix)
    values = system.eigenvalues / state.trace
    if values[0] < -state.positivity_tol:
        raise StateInvariantError(f"Cannot purify: eigenvalue {values[0]:.3e} is negative")
    order = np.argsort(values)[::-1]
    dim = state.dim
    psi = np.zeros(dim * dim, dtype=complex)
    for e, index in enumerate(order):
        environment = np.zeros(dim)
        environment[e] = 1.0
        psi += math.sqrt(max(values[index], 0.0)) * np.kron(environment, system.eigenvectors[:, index])
    return psi


# ---------------------------------------------------------------------------
# Position space
# ---------------------------------------------------------------------------

def position_density(rho: Operand, basis: OscillatorBasis) -> np.ndarray:
    """
    p(x) = Σ_mn ρ_mn ψ_{k+m}(x) ψ_{k+n}(x) on the basis grid.

    Args:
        rho: State on levels k … k+d−1
        basis: Oscillator levels and grid

    Returns:
        Density values over basis.x_grid

    Raises:
        ValidationFailure: If the top level exceeds the recurrence bound
    """
    data = as_array(rho)
    psi = basis.table(data.shape[0])
    density = np.einsum("mx,mn,nx->x", psi, data, psi).real
    deviation = abs(basis.integrate(density) - float(np.trace(data).real))
    if deviation > QUADRATURE_TOL:
        logger.warning("Density normalization off by %.3e on %s", deviation, basis)
    return density
