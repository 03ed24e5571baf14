"""
Feedback Dynamics Module
The nonlinear von Neumann equation iρ̇ = [H, f(ρ)]: right-hand side,
conserved quantities, a fixed-step RK4 integrator and the residual oracle.
"""
import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy import linalg as sla

from selfswitch.config import settings
from selfswitch.exceptions import InvalidFeedbackError, PositivityViolation, ValidationFailure
from selfswitch.models.feedback import FeedbackClassification, FeedbackPolynomial
from selfswitch.models.operators import DensityState, Operand, OperatorMatrix, as_array
from selfswitch.models.trajectory import DriftRecord, Trajectory, drift_summary
from selfswitch.services.linalg import _require_same_dim

logger = logging.getLogger(__name__)

StateFunction = Callable[[float], Operand]


def _require_valid(f: FeedbackPolynomial) -> None:
    if not f.classification.is_valid:
        raise InvalidFeedbackError(
            f"Feedback {list(f.coefficients)} violates f(0)=0 with f(1)≠0 and cannot model pure-state consistency"
        )


def _rhs_array(rho: np.ndarray, h: np.ndarray, f: FeedbackPolynomial) -> np.ndarray:
    fr = f.apply(rho)
    return -1j * (h @ fr - fr @ h)


def rhs(rho: Operand, H: Operand, f: FeedbackPolynomial) -> OperatorMatrix:
    """
    Time derivative ρ̇ = −i[H, f(ρ)].

    Raises:
        DimensionMismatchError: If ρ and H differ in dimension
        InvalidFeedbackError: If f is not feedback-consistent
    """
    _require_same_dim(rho, H)
    _require_valid(f)
    return OperatorMatrix(_rhs_array(as_array(rho), as_array(H), f))


def classify_feedback(f: FeedbackPolynomial) -> FeedbackClassification:
    """STRICT, PROPORTIONAL(c = f(1)) or INVALID."""
    return f.classification


def feedback_vanishes_on_pure(f: FeedbackPolynomial, rho: Operand, tol: float = 1e-10) -> bool:
    """
    Check that f acts on a projector state as c·ρ with c = f(1).

    Args:
        f: Feedback polynomial
        rho: Candidate pure state (ρ² = ρ)
        tol: Relative tolerance

    Returns:
        True if ρ is a projector and f(ρ) = f(1)ρ within tol
    """
    data = as_array(rho)
    scale = max(float(np.linalg.norm(data)), 1.0)
    if np.linalg.norm(data @ data - data) > tol * scale:
        return False
    return bool(np.linalg.norm(f.apply(data) - f.value(1.0) * data) <= tol * scale)


def conserved_energy(rho: Operand, H: Operand, f: FeedbackPolynomial) -> float:
    """h = Tr H f(ρ)."""
    _require_same_dim(rho, H)
    return float(np.trace(as_array(H) @ f.apply(as_array(rho))).real)


def conserved_moments(rho: Operand, n_max: int = settings.MOMENT_ORDER) -> list[float]:
    """(Tr ρ, Tr ρ², …, Tr ρ^n_max)."""
    if n_max < 1:
        raise ValidationFailure(f"n_max must be at least 1, got {n_max}")
    data = as_array(rho)
    power = data
    moments = [float(np.trace(power).real)]
    for _ in range(n_max - 1):
        power = power @ data
        moments.append(float(np.trace(power).real))
    return moments


def drift_record(t: float, rho: Operand, H: Operand, f: FeedbackPolynomial) -> DriftRecord:
    return DriftRecord(t, conserved_energy(rho, H, f), tuple(conserved_moments(rho)))


def conservation_report(
    times: Sequence[float],
    states: Sequence[Operand],
    H: Operand,
    f: FeedbackPolynomial,
) -> dict[str, float]:
    """Max relative drift of h and c₁…c₄ over a set of samples."""
    return drift_summary([drift_record(t, s, H, f) for t, s in zip(times, states)])


def integrate(
    rho0: DensityState,
    H: Operand,
    f: FeedbackPolynomial,
    t0: float,
    t1: float,
    dt: float,
    stride: int = settings.DRIFT_LOG_STRIDE,
    positivity_tol: float = settings.INTEGRATOR_POSITIVITY_TOL,
) -> Trajectory:
    """
    Integrate iρ̇ = [H, f(ρ)] with classical fixed-step RK4.

    The step is shrunk to (t1 − t0)/n so the final sample lands on t1.
    Each step is re-Hermitized; positivity is checked but never repaired.

    Args:
        rho0: Initial state
        H: Hamiltonian
        f: Feedback polynomial
        t0: Start time
        t1: End time
        dt: Requested step (upper bound)
        stride: Log every stride-th step (the final step is always logged)
        positivity_tol: Allowed negative eigenvalue relative to ‖ρ‖_F

    Returns:
        Trajectory of the logged samples

    Raises:
        ValidationFailure: If dt is not in (0, t1 − t0]
        PositivityViolation: If ρ loses positivity (carries the time)
    """
    _require_same_dim(rho0, H)
    _require_valid(f)
    span = t1 - t0
    if not dt > 0.0:
        raise ValidationFailure(f"Time step must be positive, got {dt}")
    if dt > span:
        raise ValidationFailure(f"Time step {dt} exceeds the integration window {span}")
    if stride < 1:
        raise ValidationFailure(f"Stride must be at least 1, got {stride}")

    n_steps = max(1, math.ceil(span / dt - 1e-9))
    step = span / n_steps
    h = as_array(H)
    rho = as_array(rho0).copy()

    times = [t0]
    states = [rho0]
    log = [drift_record(t0, rho, h, f)]

    for k in range(1, n_steps + 1):
        k1 = _rhs_array(rho, h, f)
        k2 = _rhs_array(rho + 0.5 * step * k1, h, f)
        k3 = _rhs_array(rho + 0.5 * step * k2, h, f)
        k4 = _rhs_array(rho + step * k3, h, f)
        rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)

        t = t0 + k * step
        lowest = float(sla.eigvalsh(rho)[0])
        norm = float(np.linalg.norm(rho))
        if lowest < -positivity_tol * norm:
            logger.error("Positivity lost at t=%.6g after %d steps", t, k)
            raise PositivityViolation(t, lowest, positivity_tol * norm)

        if k % stride == 0 or k == n_steps:
            times.append(t)
            states.append(DensityState(rho, rho0.hermiticity_tol, positivity_tol))
            log.append(drift_record(t, rho, h, f))

    trajectory = Trajectory(times, states, log)
    drift = trajectory.max_relative_drift()
    logger.info(
        "Integrated %d RK4 steps of %.3g on [%.6g, %.6g]; max drift %.3e",
        n_steps, step, t0, t1, max(drift.values()),
    )
    return trajectory


def residual(
    trajectory_point_fn: StateFunction,
    H: Operand,
    f: FeedbackPolynomial,
    t: float,
    fd_step: float = settings.FD_STEP,
) -> float:
    """
    How far a candidate solution is from satisfying the equation at t.

    Uses a 5-point central difference for ρ̇.

    Returns:
        ‖ρ̇_fd − rhs(ρ(t))‖_F / max(1, ‖ρ(t)‖_F)
    """
    if not fd_step > 0.0:
        raise ValidationFailure(f"Finite-difference step must be positive, got {fd_step}")

    def at(s: float) -> np.ndarray:
        return as_array(trajectory_point_fn(s))

    rho_dot = (
        -at(t + 2 * fd_step) + 8.0 * at(t + fd_step) - 8.0 * at(t - fd_step) + at(t - 2 * fd_step)
    ) / (12.0 * fd_step)
    rho = at(t)
    expected = rhs(rho, H, f).data
    return float(np.linalg.norm(rho_dot - expected)) / max(1.0, float(np.linalg.norm(rho)))
