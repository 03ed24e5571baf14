"""
Verification Suite Module
Runs the invariant checks of every numerical module and reports each
measured value against its threshold.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from selfswitch.config import settings
from selfswitch.exceptions import VerificationFailed
from selfswitch.models.feedback import FeedbackPolynomial
from selfswitch.models.operators import DensityState, Operand
from selfswitch.models.parameters import H0, MultiSpeciesConfig, MutationParams, SwitchingProfile
from selfswitch.services.dynamics import conservation_report, integrate, residual
from selfswitch.services.linalg import evolution_operator, partial_trace
from selfswitch.services.observables import (
    REDUCED_EIGENVALUE_TOL,
    ppt_is_positive,
    reduced_eigenvalue_curves,
    species_observables,
    switching_probabilities,
)
from selfswitch.services.solutions import (
    ORGANISM_LAYOUT,
    ORGANISM_SCALE,
    PARTICLE_FACTOR,
    lax_covariance_check,
    multispecies_family,
    mutation3_cross_check,
    mutation3_family,
    organism_asymptote,
    organism_family,
    organism_hamiltonian,
    organism_initial_state,
    organism_interaction_state,
    organism_seed,
    organism_seed_deviation,
    organism_solution,
    switching_duration,
    switching_functions,
)

logger = logging.getLogger(__name__)

ASYMPTOTE_TOL = 1e-8
ENDPOINT_TOL = 1e-6
ENDPOINT_DT = 2.5e-4
DURATION_SCALING_TOL = 0.05
UNCERTAINTY_ASYMPTOTE = 0.010811
UNCERTAINTY_ASYMPTOTE_TOL = 1e-4
IDENTITY_TOL = 1e-12
IDENTITY_SAMPLES = 10_000
IDENTITY_SEED = 20240917
# Size of the deliberate defect used to prove the residual oracle detects faults
FAULT_SIZE = 1e-3


class VerifyLevel(str, Enum):
    QUICK = "quick"
    FULL = "full"


SAMPLES = {
    VerifyLevel.QUICK: {"organism": 201, "multispecies": 61, "mutation": 51, "uncertainty": 401},
    VerifyLevel.FULL: {"organism": 2001, "multispecies": 401, "mutation": 201, "uncertainty": 401},
}


@dataclass
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    relation: str = "<"


@dataclass
class VerificationReport:
    level: VerifyLevel
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, name: str, measured: float, threshold: float, relation: str = "<") -> CheckResult:
        if relation == "<":
            ok = measured < threshold
        elif relation == ">=":
            ok = measured >= threshold
        else:
            ok = measured > threshold
        result = CheckResult(name, float(measured), float(threshold), bool(ok), relation)
        self.checks.append(result)
        logger.debug("%s: %.6e %s %.6e -> %s", name, measured, relation, threshold, "ok" if ok else "FAILED")
        return result

    def raise_for_failures(self) -> None:
        """
        Raises:
            VerificationFailed: If any check failed, naming the failures
        """
        if self.failures:
            raise VerificationFailed([c.name for c in self.failures])


def _max_residual(state_fn: Callable[[float], Operand], H: Operand, f: FeedbackPolynomial, times: Sequence[float]) -> float:
    return max(residual(state_fn, H, f, t) for t in times)


def _perturbed(state_fn: Callable[[float], DensityState], size: float) -> Callable[[float], np.ndarray]:
    # Hermitian defect on the entries (1,3) and (3,1), counted from one
    def candidate(t: float) -> np.ndarray:
        data = state_fn(t).data.copy()
        data[0, 2] += size
        data[2, 0] += size
        return data
    return candidate


# ---------------------------------------------------------------------------
# Check groups
# ---------------------------------------------------------------------------

def _organism_checks(report: VerificationReport, count: int, fault: float) -> None:
    H = organism_hamiltonian()
    f = FeedbackPolynomial.square()
    times = np.linspace(-10.0, 10.0, count)
    candidate = _perturbed(organism_solution, fault) if fault else organism_solution
    report.add("organism_residual", _max_residual(candidate, H, f, times), settings.RESIDUAL_THRESHOLD)

    states = [organism_solution(t) for t in times]
    deviation = 0.0
    for t, state in zip(times, states):
        curves = reduced_eigenvalue_curves(t, verify=False)
        for particle, expected in ((1, curves.particle1), (2, curves.particle2)):
            reduced = partial_trace(state, ORGANISM_LAYOUT, PARTICLE_FACTOR[particle])
            deviation = max(deviation, float(np.max(np.abs(reduced.eigenvalues / reduced.trace - np.asarray(expected)))))
    report.add("organism_reduced_eigenvalues", deviation, REDUCED_EIGENVALUE_TOL)

    scale = organism_initial_state().frobenius_norm()
    asymptote = max(
        (organism_interaction_state(sign * 10.0) - organism_asymptote(sign)).frobenius_norm() / scale
        for sign in (1, -1)
    )
    report.add("organism_asymptotes", asymptote, ASYMPTOTE_TOL)
    report.add("organism_block2_returns_to_seed", organism_seed_deviation(10.0, 2) / scale, ASYMPTOTE_TOL)
    exchanged = abs(organism_seed_deviation(10.0, 1) - math.sqrt(14.0)) / scale
    report.add("organism_block1_stays_exchanged", exchanged, ASYMPTOTE_TOL)

    ppt_times = np.linspace(-10.0, 10.0, 201)
    lowest = min(ppt_is_positive(organism_solution(t), ORGANISM_LAYOUT).min_eigenvalue for t in ppt_times)
    report.add("organism_ppt_min_eigenvalue", lowest, -settings.POSITIVITY_TOL, relation=">=")

    lax = lax_covariance_check(organism_seed, H, f, organism_family().params, times[:: max(1, count // 21)])
    report.add("organism_isospectral", max(lax.spectrum_deviations), settings.ISOSPECTRAL_TOL)
    report.add("organism_projector_form", max(lax.projector_form_deviations), settings.ISOSPECTRAL_TOL)

    drift = conservation_report(times, states, H, f)
    report.add("organism_conservation", max(drift.values()), settings.CLOSED_FORM_DRIFT_TOL)


def _multispecies_checks(report: VerificationReport, count: int) -> None:
    times = np.linspace(-30.0, 30.0, count)
    worst_residual = worst_diagonal = worst_drift = 0.0
    for t0, t1 in ((0.0, 0.0), (150.0, 0.0), (0.0, 150.0)):
        cfg = MultiSpeciesConfig.worked_example(t0, t1)
        family = multispecies_family(cfg)
        f = FeedbackPolynomial.quadratic(cfg.h)
        states = [family(t) for t in times]
        worst_residual = max(worst_residual, _max_residual(family, family.H, f, times))
        diagonals = np.array([np.diag(s.data).real for s in states])
        worst_diagonal = max(worst_diagonal, float(np.max(np.abs(diagonals - diagonals[0]))))
        worst_drift = max(worst_drift, max(conservation_report(times, states, family.H, f).values()))
    report.add("multispecies_residual", worst_residual, settings.RESIDUAL_THRESHOLD)
    report.add("multispecies_constant_diagonal", worst_diagonal, 1e-10)
    report.add("multispecies_conservation", worst_drift, settings.CLOSED_FORM_DRIFT_TOL)


def _mutation_checks(report: VerificationReport, count: int) -> None:
    times = np.linspace(-50.0, 50.0, count)
    strengths = (H0 / 2.0, H0, 2.0 * H0)
    worst_residual = worst_trace = worst_spectrum = worst_cross = 0.0
    durations = []
    for h in strengths:
        params = MutationParams(h=h, alpha=1.0)
        family = mutation3_family(params)
        f = FeedbackPolynomial.quadratic(h)
        states = [family(t) for t in times]
        worst_residual = max(worst_residual, _max_residual(family, family.H, f, times))
        worst_trace = max(worst_trace, max(abs(s.trace - 1.0) for s in states))
        reference = states[0].eigenvalues
        worst_spectrum = max(worst_spectrum, max(float(np.max(np.abs(s.eigenvalues - reference))) for s in states))
        cross = mutation3_cross_check(params, times[:: max(1, count // 11)])
        worst_cross = max(worst_cross, cross.magnitude_deviation, cross.zeta_deviation)
        durations.append(switching_duration(params) * h)
    report.add("mutation3_residual", worst_residual, settings.RESIDUAL_THRESHOLD)
    report.add("mutation3_unit_trace", worst_trace, settings.ISOSPECTRAL_TOL)
    report.add("mutation3_isospectral", worst_spectrum, settings.ISOSPECTRAL_TOL)
    report.add("mutation3_dressing_agreement", worst_cross, 1e-8)
    report.add("mutation3_duration_scaling", max(durations) / min(durations) - 1.0, DURATION_SCALING_TOL)


def _uncertainty_checks(report: VerificationReport, count: int) -> None:
    cfg = MultiSpeciesConfig.worked_example()
    _, _, early = switching_probabilities(-60.0, SwitchingProfile())
    _, _, late = switching_probabilities(60.0, SwitchingProfile())
    report.add("uncertainty_bound_past", float(early), 1e-6)
    report.add("uncertainty_bound_future", abs(float(late) - UNCERTAINTY_ASYMPTOTE), UNCERTAINTY_ASYMPTOTE_TOL)
    terms = [species_observables(cfg, t).terms for t in np.linspace(-60.0, 60.0, count)]
    slack = min(term.product - term.bound for term in terms)
    report.add("uncertainty_inequality_slack", slack, -1e-12, relation=">=")


def _switching_checks(report: VerificationReport) -> None:
    rng = np.random.default_rng(IDENTITY_SEED)
    t, t0, t1 = rng.uniform(-100.0, 100.0, size=(3, IDENTITY_SAMPLES))
    worst = 0.0
    for i in range(IDENTITY_SAMPLES):
        F, F0, F1 = switching_functions(t[i], SwitchingProfile(t0=t0[i], t1=t1[i]))
        worst = max(worst, abs(F0 ** 2 + F1 ** 2 - F * (1.0 - F)))
    report.add("switching_identity", worst, IDENTITY_TOL)

    profile = SwitchingProfile()
    late = switching_functions(1e3, profile)
    early = switching_functions(-1e3, profile)
    tail = max(abs(late.F - 1.0), late.F0, late.F1, early.F, early.F0, early.F1)
    report.add("switching_asymptotics", tail, IDENTITY_TOL)


def _integrator_checks(report: VerificationReport) -> None:
    H = organism_hamiltonian()
    start, stop = -5.0, 5.0
    initial = organism_solution(start)

    def endpoint_error(f: FeedbackPolynomial, exact: np.ndarray, dt: float) -> tuple[float, float]:
        trajectory = integrate(initial, H, f, start, stop, dt, stride=1000)
        error = float(np.linalg.norm(trajectory.final_state.data - exact))
        return error, max(trajectory.max_relative_drift().values())

    def ratio(f: FeedbackPolynomial, exact: np.ndarray) -> float:
        coarse, _ = endpoint_error(f, exact, settings.CONVERGENCE_DT)
        fine, _ = endpoint_error(f, exact, settings.CONVERGENCE_DT / 2.0)
        return coarse / fine if fine > 0.0 else math.inf

    # Proportional feedback is a linear flow: RK4 is in its h⁴ regime at these steps
    proportional = FeedbackPolynomial((0.0, ORGANISM_SCALE))
    U = evolution_operator(H, ORGANISM_SCALE * (stop - start)).data
    linear = ratio(proportional, U @ initial.data @ U.conj().T)
    low, high = settings.ORDER_RATIO_RANGE
    report.add("integrator_order_ratio_low", linear, low, relation=">=")
    report.add("integrator_order_ratio_high", linear, high)

    # The organism error falls as dt⁵ at practical steps, so only the lower bound applies
    square = FeedbackPolynomial.square()
    exact = organism_solution(stop).data
    report.add("integrator_organism_order_ratio", ratio(square, exact), low, relation=">=")

    error, drift = endpoint_error(square, exact, ENDPOINT_DT)
    report.add("integrator_endpoint", error, ENDPOINT_TOL)
    report.add("integrator_conservation", drift, settings.INTEGRATOR_DRIFT_TOL)


def _fault_injection_check(report: VerificationReport) -> None:
    times = np.linspace(-10.0, 10.0, 21)
    detected = _max_residual(
        _perturbed(organism_solution, FAULT_SIZE), organism_hamiltonian(), FeedbackPolynomial.square(), times
    )
    report.add("fault_injection_detected", detected, settings.RESIDUAL_THRESHOLD, relation=">")


def verify_suite(level: VerifyLevel = VerifyLevel.QUICK, organism_fault: float = 0.0) -> VerificationReport:
    """
    Run every module invariant.

    Args:
        level: QUICK samples coarsely; FULL adds dense sampling and the
            integrator order and endpoint checks
        organism_fault: Size of a Hermitian defect added to the organism
            state before its residual check (0 disables)

    Returns:
        VerificationReport listing each measured value and threshold
    """
    level = VerifyLevel(level)
    samples = SAMPLES[level]
    report = VerificationReport(level)
    _organism_checks(report, samples["organism"], organism_fault)
    _multispecies_checks(report, samples["multispecies"])
    _mutation_checks(report, samples["mutation"])
    _uncertainty_checks(report, samples["uncertainty"])
    _switching_checks(report)
    _fault_injection_check(report)
    if level is VerifyLevel.FULL:
        _integrator_checks(report)
    logger.info("Verification (%s): %d checks, %d failed", level.value, len(report.checks), len(report.failures))
    return report
