import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from selfswitch.exceptions import DomainError, LayoutError, StateInvariantError, ValidationFailure
from selfswitch.models.operators import CompositeLayout, DensityState
from selfswitch.models.parameters import MutationParams, SwitchingProfile
from selfswitch.services.linalg import partial_trace
from selfswitch.services.observables import (
    Proposition,
    organism_entropies,
    organism_lifetime,
    position_density,
    ppt_is_positive,
    proposition_probability,
    purify,
    reduced_eigenvalue_curves,
    reduced_entropies,
    species_observables,
    species_propositions,
    switching_probabilities,
    uncertainty_bound,
    uncertainty_terms,
    von_neumann_entropy,
)
from selfswitch.services.oscillator import OscillatorBasis
from selfswitch.services.solutions import ORGANISM_LAYOUT, mutation3, organism_solution

LN2 = math.log(2.0)


class TestEntropy:
    def test_maximally_mixed_and_pure(self):
        assert von_neumann_entropy(np.eye(2) * 3.0) == pytest.approx(LN2)
        assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)

    def test_rejects_zero_trace(self):
        with pytest.raises(DomainError):
            von_neumann_entropy(np.zeros((2, 2)))

    def test_organism_at_switching_time(self):
        s1, s2 = organism_entropies(0.0)
        assert s1 == pytest.approx(LN2, abs=1e-12)
        assert s2 == pytest.approx(0.63383, abs=1e-4)

    def test_whole_state_entropy_is_constant(self):
        values = [von_neumann_entropy(organism_solution(t)) for t in (-3.0, 0.0, 2.0)]
        assert_allclose(values, values[0], atol=1e-12)

    def test_reduced_entropies_in_factor_order(self):
        state = organism_solution(0.5)
        s_factor0, s_factor1 = reduced_entropies(state, ORGANISM_LAYOUT)
        s1, s2 = organism_entropies(0.5)
        assert s_factor1 == pytest.approx(s1)
        assert s_factor0 == pytest.approx(s2)

    @pytest.mark.parametrize("t", [0.1, 0.35, 1.0, 2.5, 6.0])
    def test_particle_entropies_are_even_in_time(self, t):
        assert_allclose(organism_entropies(-t), organism_entropies(t), atol=1e-12)

    def test_lifetime_is_full_width_at_half_maximum(self):
        width = organism_lifetime()
        peak = LN2 - organism_entropies(0.0)[1]
        for t in (-width / 2, width / 2):
            assert LN2 - organism_entropies(t)[1] == pytest.approx(peak / 2, abs=1e-9)


class TestReducedEigenvalues:
    @pytest.mark.parametrize("t", [-10.0, -1.0, 0.0, 0.3, 4.0, 10.0])
    def test_closed_forms_agree_with_partial_traces(self, t):
        curves = reduced_eigenvalue_curves(t, verify=True)
        assert sum(curves.particle1) == pytest.approx(1.0)
        assert sum(curves.particle2) == pytest.approx(1.0)

    def test_particle2_spread_at_origin(self):
        lower, upper = reduced_eigenvalue_curves(0.0).particle2
        assert upper - lower == pytest.approx(math.sqrt(26 + 2 * math.sqrt(105)) / 20)


class TestSeparability:
    @pytest.mark.parametrize("t", np.linspace(-10, 10, 21))
    def test_organism_stays_ppt(self, t):
        result = ppt_is_positive(organism_solution(t), ORGANISM_LAYOUT)
        assert result.positive
        assert result.min_eigenvalue >= -1e-10

    def test_bell_state_fails(self):
        bell = np.zeros(4)
        bell[[0, 3]] = 1.0
        result = ppt_is_positive(DensityState(np.outer(bell, bell)), CompositeLayout((2, 2)))
        assert not result.positive
        assert result.min_eigenvalue == pytest.approx(-0.5)

    def test_agrees_with_concurrence_on_random_qubit_pairs(self):
        rng = np.random.default_rng(11)
        flip = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
        verdicts = []
        for _ in range(100):
            psi = rng.normal(size=4) + 1j * rng.normal(size=4)
            psi /= np.linalg.norm(psi)
            weight = rng.uniform()
            rho = weight * np.outer(psi, psi.conj()) + (1.0 - weight) * np.eye(4) / 4.0
            # Wootters: C = max(0, λ₁ − λ₂ − λ₃ − λ₄), λ² the eigenvalues of ρ ρ̃
            tilde = flip @ rho.conj() @ flip
            lambdas = np.sort(np.sqrt(np.clip(np.linalg.eigvals(rho @ tilde).real, 0.0, None)))[::-1]
            concurrence = max(0.0, lambdas[0] - lambdas[1:].sum())
            result = ppt_is_positive(DensityState(rho), CompositeLayout((2, 2)))
            if abs(result.min_eigenvalue) < 1e-6:
                continue
            assert result.positive == (concurrence < 1e-6)
            verdicts.append(result.positive)
        assert len(verdicts) >= 90
        assert any(verdicts) and not all(verdicts)

    def test_needs_two_factors(self):
        with pytest.raises(LayoutError):
            ppt_is_positive(DensityState(np.eye(8)), CompositeLayout((2, 2, 2)))


def test_purification_recovers_state(organism_state):
    psi = purify(organism_state)
    assert np.vdot(psi, psi).real == pytest.approx(1.0)
    reduced = partial_trace(DensityState(np.outer(psi, psi.conj())), CompositeLayout((4, 4)), 1)
    assert_allclose(reduced.data, organism_state.data / organism_state.trace, atol=1e-12)


@pytest.mark.parametrize("dim", range(2, 9))
def test_purification_of_random_states(dim):
    rng = np.random.default_rng(dim)
    for _ in range(5):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        state = DensityState(m @ m.conj().T)
        psi = purify(state)
        assert np.vdot(psi, psi).real == pytest.approx(1.0)
        reduced = partial_trace(DensityState(np.outer(psi, psi.conj())), CompositeLayout((dim, dim)), 1)
        assert_allclose(reduced.data, state.data / state.trace, atol=1e-12)


def test_purification_rejects_non_positive():
    with pytest.raises(StateInvariantError):
        purify(DensityState(np.diag([1.0, -0.4]), positivity_tol=0.45))


class TestPropositions:
    def test_projector_validation(self):
        with pytest.raises(ValidationFailure):
            Proposition(np.diag([1.0, 0.5]))
        with pytest.raises(ValidationFailure):
            Proposition.from_vector([0, 0])

    def test_commuting_propositions_have_no_bound(self):
        P = Proposition(np.diag([1.0, 0.0]))
        Q = Proposition(np.diag([1.0, 1.0]))
        assert P.commutes_with(Q)
        assert uncertainty_bound(P, Q, np.diag([0.3, 0.7])) == pytest.approx(0.0)

    def test_qubit_uncertainty(self):
        P = Proposition(np.diag([1.0, 0.0]))
        Q = Proposition.from_vector([1.0, 1.0])
        rho = np.array([[0.5, -0.5j], [0.5j, 0.5]])
        terms = uncertainty_terms(P, Q, rho)
        assert proposition_probability(P, rho) == pytest.approx(0.5)
        assert terms.delta_p == pytest.approx(0.5)
        assert terms.bound == pytest.approx(0.25)
        assert terms.satisfied

    @pytest.mark.parametrize("dim, rank", [(2, 1), (4, 2), (6, 3)])
    def test_probability_is_unitarily_invariant(self, dim, rank):
        rng = np.random.default_rng(dim)
        columns, _ = np.linalg.qr(rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank)))
        P = columns @ columns.conj().T
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = m @ m.conj().T
        for _ in range(5):
            U = unitary_group.rvs(dim, random_state=rng)
            rotated = proposition_probability(Proposition(U @ P @ U.conj().T), U @ rho @ U.conj().T)
            assert rotated == pytest.approx(proposition_probability(Proposition(P), rho), abs=1e-12)

    def test_species_propositions_do_not_commute(self, worked_example):
        P, P1 = species_propositions(worked_example)
        assert P.dim == 4
        assert not P.commutes_with(P1)


class TestSwitchingProbabilities:
    @pytest.mark.parametrize("profile", [SwitchingProfile(), SwitchingProfile(t0=10.0, t1=-5.0)])
    @pytest.mark.parametrize("t", [-20.0, -1.0, 0.0, 2.5, 30.0])
    def test_closed_forms_match_reduced_state(self, profile, t):
        measured = species_observables(profile.config(), t)
        p, p1, bound = switching_probabilities(t, profile)
        assert measured.p == pytest.approx(p, abs=1e-10)
        assert measured.p1 == pytest.approx(p1, abs=1e-10)
        assert measured.terms.bound == pytest.approx(bound, abs=1e-10)
        assert measured.terms.satisfied

    def test_complementarity_emerges(self):
        _, _, early = switching_probabilities(-60.0, SwitchingProfile())
        _, _, late = switching_probabilities(60.0, SwitchingProfile())
        assert early < 1e-6
        assert late == pytest.approx(0.010811, abs=1e-4)

    def test_inequality_over_window(self, worked_example):
        for t in np.linspace(-60, 60, 61):
            assert species_observables(worked_example, t).terms.satisfied


class TestPositionDensity:
    def test_normalized_density_integrates_to_one(self):
        basis = OscillatorBasis()
        density = position_density(mutation3(MutationParams.critical(), 0.0), basis)
        assert basis.integrate(density) == pytest.approx(1.0, abs=1e-6)
        assert np.all(density > -1e-12)

    def test_ground_state(self):
        basis = OscillatorBasis(x_grid=np.linspace(-2, 2, 5))
        density = position_density(np.diag([1.0, 0.0, 0.0]), basis)
        assert density[2] == pytest.approx(1 / math.sqrt(math.pi))
