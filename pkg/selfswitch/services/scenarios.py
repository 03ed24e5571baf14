"""
Scenario Runner Module
Evaluates a scenario's model on its time grid (closed form or RK4) and
writes one CSV per requested observable plus a conservation report.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from selfswitch.config import settings
from selfswitch.exceptions import ScenarioError
from selfswitch.models.feedback import FeedbackPolynomial
from selfswitch.models.operators import DensityState, OperatorMatrix
from selfswitch.models.parameters import MultiSpeciesConfig, MutationParams, profile_from_betas
from selfswitch.models.scenario import ModelName, RunMode, Scenario
from selfswitch.services.dynamics import conservation_report, conserved_energy, conserved_moments, integrate, residual
from selfswitch.services.linalg import partial_trace
from selfswitch.services.observables import (
    ppt_is_positive,
    proposition_probability,
    reduced_eigenvalue_curves,
    species_propositions,
    uncertainty_terms,
    von_neumann_entropy,
)
from selfswitch.services.oscillator import OscillatorBasis, oscillator_table
from selfswitch.services.solutions import (
    ORGANISM_LAYOUT,
    PARTICLE_FACTOR,
    embed_species,
    multispecies_family,
    mutation3_family,
    organism_hamiltonian,
    organism_solution,
    species_layout,
    switching_functions,
)
from selfswitch.storage.csv_writer import write_table
from selfswitch.utils.grids import format_label, lattice

logger = logging.getLogger(__name__)

TIME_PARAMETERS = ("t_start", "t_end", "t_step")


@dataclass
class ModelBinding:
    """Everything a run needs to know about one model instance."""
    hamiltonian: OperatorMatrix
    feedback: FeedbackPolynomial
    closed_form: Callable[[float], DensityState]
    parameters: Optional[Any] = None


@dataclass
class RunResult:
    """Files written by a run and the conservation summary."""
    output_dir: Path
    files: list[Path] = field(default_factory=list)
    drift: dict[str, float] = field(default_factory=dict)
    threshold: float = settings.CLOSED_FORM_DRIFT_TOL

    @property
    def conserved(self) -> bool:
        return all(value < self.threshold for value in self.drift.values())


@dataclass
class _Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)


def bind_model(scenario: Scenario) -> ModelBinding:
    """Hamiltonian, feedback and closed-form solution for a scenario's model."""
    params = scenario.parameters()
    if scenario.model is ModelName.ORGANISM:
        return ModelBinding(organism_hamiltonian(), FeedbackPolynomial.square(), organism_solution)
    if scenario.model is ModelName.MUTATION3:
        family = mutation3_family(params)
        return ModelBinding(family.H, FeedbackPolynomial.quadratic(params.h), family, params)
    family = multispecies_family(params)
    return ModelBinding(family.H, FeedbackPolynomial.quadratic(params.h), family, params)


def sample_times(scenario: Scenario) -> np.ndarray:
    """t_start + i·t_step up to t_end."""
    return lattice(scenario.t_start, scenario.t_end, scenario.t_step)


def stamp_parameters(scenario: Scenario) -> dict[str, Any]:
    stamp: dict[str, Any] = {
        "model": scenario.model.value,
        "mode": scenario.mode.value,
        "t_start": scenario.t_start,
        "t_end": scenario.t_end,
        "t_step": scenario.t_step,
    }
    if scenario.mode is RunMode.INTEGRATE:
        stamp["stride"] = scenario.stride
    params = scenario.parameters()
    if params is not None:
        stamp.update(params.model_dump())
    return stamp


# ---------------------------------------------------------------------------
# Observables per output name
# ---------------------------------------------------------------------------

def _normalized_density(state: DensityState) -> np.ndarray:
    return state.data / state.trace


def _species_reductions(cfg: MultiSpeciesConfig, state: DensityState) -> tuple[np.ndarray, np.ndarray]:
    layout = species_layout(cfg)
    embedded = DensityState(embed_species(cfg, state))
    return partial_trace(embedded, layout, 0).data, partial_trace(embedded, layout, 1).data


class _Evaluator:
    """Builds the table for each requested output from (t, state) samples."""

    def __init__(self, scenario: Scenario, binding: ModelBinding, closed_form_samples: bool):
        self.scenario = scenario
        self.binding = binding
        self.closed_form_samples = closed_form_samples
        self._basis: Optional[OscillatorBasis] = None

    def table(self, output: str, times: Sequence[float], states: Sequence[DensityState]) -> _Table:
        handler = getattr(self, f"_{output}")
        return handler(times, states)

    # Common outputs

    def _trace(self, times, states) -> _Table:
        return _Table(["t", "trace"], [[t, s.trace] for t, s in zip(times, states)])

    def _purity(self, times, states) -> _Table:
        rows = []
        for t, s in zip(times, states):
            rows.append([t, float(np.trace(s.data @ s.data).real) / s.trace ** 2])
        return _Table(["t", "purity"], rows)

    def _energy(self, times, states) -> _Table:
        H, f = self.binding.hamiltonian, self.binding.feedback
        return _Table(["t", "energy"], [[t, conserved_energy(s, H, f)] for t, s in zip(times, states)])

    def _moments(self, times, states) -> _Table:
        columns = ["t"] + [f"c{n}" for n in range(1, settings.MOMENT_ORDER + 1)]
        return _Table(columns, [[t, *conserved_moments(s)] for t, s in zip(times, states)])

    def _spectrum(self, times, states) -> _Table:
        dim = states[0].dim
        columns = ["t"] + [f"lambda{i}" for i in range(dim)]
        return _Table(columns, [[t, *s.eigenvalues] for t, s in zip(times, states)])

    def _residual(self, times, states) -> _Table:
        H, f = self.binding.hamiltonian, self.binding.feedback
        if self.closed_form_samples:
            rows = [[t, residual(self.binding.closed_form, H, f, t)] for t in times]
            return _Table(["t", "residual"], rows)
        # Integrated samples are compared against the closed form instead
        rows = []
        for t, s in zip(times, states):
            exact = self.binding.closed_form(t).data
            rows.append([t, float(np.linalg.norm(s.data - exact)) / max(1.0, float(np.linalg.norm(exact)))])
        return _Table(["t", "closed_form_error"], rows)

    def _matrix(self, times, states) -> _Table:
        dim = states[0].dim
        columns = ["t"]
        for i in range(dim):
            for j in range(dim):
                columns += [f"re_{i}_{j}", f"im_{i}_{j}"]
        rows = []
        for t, s in zip(times, states):
            entries = s.data.ravel()
            rows.append([t, *np.column_stack([entries.real, entries.imag]).ravel()])
        return _Table(columns, rows)

    # Organism

    def _entropy(self, times, states) -> _Table:
        rows = []
        for t, s in zip(times, states):
            rows.append([
                t,
                von_neumann_entropy(partial_trace(s, ORGANISM_LAYOUT, PARTICLE_FACTOR[1])),
                von_neumann_entropy(partial_trace(s, ORGANISM_LAYOUT, PARTICLE_FACTOR[2])),
            ])
        return _Table(["t", "S1", "S2"], rows)

    def _reduced_eigenvalues(self, times, states) -> _Table:
        rows = []
        for t, s in zip(times, states):
            curves = reduced_eigenvalue_curves(t, verify=False)
            measured = []
            for particle in (1, 2):
                reduced = partial_trace(s, ORGANISM_LAYOUT, PARTICLE_FACTOR[particle])
                measured.extend(reduced.eigenvalues / reduced.trace)
            expected = [*curves.particle1, *curves.particle2]
            deviation = float(np.max(np.abs(np.asarray(measured) - np.asarray(expected))))
            rows.append([t, *measured, deviation])
        return _Table(["t", "p1_minus", "p1_plus", "p2_minus", "p2_plus", "closed_form_deviation"], rows)

    def _ppt(self, times, states) -> _Table:
        rows = []
        for t, s in zip(times, states):
            result = ppt_is_positive(s, ORGANISM_LAYOUT)
            rows.append([t, result.min_eigenvalue, result.positive])
        return _Table(["t", "min_eigenvalue", "positive"], rows)

    # Three-level mutation

    def _density(self, times, states) -> _Table:
        params: MutationParams = self.binding.parameters
        if self._basis is None:
            self._basis = OscillatorBasis(level_offset=params.k)
        psi = self._basis.table(3)
        rows = []
        for t, s in zip(times, states):
            density = np.einsum("mx,mn,nx->x", psi, _normalized_density(s), psi).real
            rows.extend([t, x, p] for x, p in zip(self._basis.x_grid, density))
        return _Table(["t", "x", "p"], rows)

    def _density_origin(self, times, states) -> _Table:
        params: MutationParams = self.binding.parameters
        psi = oscillator_table([params.k, params.k + 1, params.k + 2], 0.0)
        rows = [[t, float((psi @ _normalized_density(s) @ psi).real)] for t, s in zip(times, states)]
        return _Table(["t", "p0"], rows)

    # Two-species construction

    def _propositions(self, times, states) -> _Table:
        cfg: MultiSpeciesConfig = self.binding.parameters
        P, P1 = species_propositions(cfg)
        rows = []
        for t, s in zip(times, states):
            reduced, _ = _species_reductions(cfg, s)
            rows.append([t, proposition_probability(P, reduced), proposition_probability(P1, reduced)])
        return _Table(["t", "p", "p1"], rows)

    def _uncertainty(self, times, states) -> _Table:
        cfg: MultiSpeciesConfig = self.binding.parameters
        P, P1 = species_propositions(cfg)
        rows = []
        for t, s in zip(times, states):
            reduced, _ = _species_reductions(cfg, s)
            terms = uncertainty_terms(P, P1, reduced)
            rows.append([t, terms.delta_p, terms.delta_p1, terms.product, terms.bound, terms.satisfied])
        return _Table(["t", "delta_p", "delta_p1", "product", "bound", "satisfied"], rows)

    def _switching(self, times, states) -> _Table:
        profile = profile_from_betas(self.binding.parameters)
        if profile is None:
            raise ScenarioError("The switching output needs l = 1 and real positive betas = exp(t_j/4)")
        values = switching_functions(np.asarray(times, dtype=float), profile)
        return _Table(["t", "F", "F0", "F1"], [list(row) for row in zip(times, *values)])

    def _species_entropy(self, times, states) -> _Table:
        cfg: MultiSpeciesConfig = self.binding.parameters
        rows = []
        for t, s in zip(times, states):
            first, second = _species_reductions(cfg, s)
            rows.append([t, von_neumann_entropy(first), von_neumann_entropy(second)])
        return _Table(["t", "S_I", "S_II"], rows)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

def resolve_output_dir(scenario: Scenario, base_dir: Optional[Path] = None) -> Path:
    base = Path(base_dir) if base_dir is not None else Path(settings.OUTPUT_DIR)
    return base / (scenario.output_path or scenario.model.value)


def run_scenario(scenario: Scenario, output_dir: Optional[Path] = None, command: str = "run") -> RunResult:
    """
    Evaluate a scenario and write its CSV files.

    Args:
        scenario: Validated scenario
        output_dir: Destination directory (defaults to the output directory
            joined with scenario.output_path)
        command: Command name recorded in the file stamps

    Returns:
        RunResult with the written files and the conservation drift

    Raises:
        ScenarioError: If an output cannot be produced for the model's parameters
        NumericalFailure: If the solution degenerates or integration loses positivity
        OSError: If a file cannot be written
    """
    target = Path(output_dir) if output_dir is not None else resolve_output_dir(scenario)
    binding = bind_model(scenario)
    H, f = binding.hamiltonian, binding.feedback

    if scenario.mode is RunMode.INTEGRATE:
        start = binding.closed_form(scenario.t_start)
        trajectory = integrate(start, H, f, scenario.t_start, scenario.t_end, scenario.t_step, stride=scenario.stride)
        times, states = list(trajectory.times), trajectory.states
        drift = trajectory.max_relative_drift()
        threshold = settings.INTEGRATOR_DRIFT_TOL
    else:
        times = list(sample_times(scenario))
        states = [binding.closed_form(t) for t in times]
        drift = conservation_report(times, states, H, f)
        threshold = settings.CLOSED_FORM_DRIFT_TOL
    logger.info("Evaluated %s at %d samples (%s)", scenario.model.value, len(times), scenario.mode.value)

    stamp = stamp_parameters(scenario)
    result = RunResult(target, drift=drift, threshold=threshold)
    evaluator = _Evaluator(scenario, binding, closed_form_samples=scenario.mode is RunMode.CLOSED_FORM)
    for output in scenario.outputs:
        table = evaluator.table(output, times, states)
        result.files.append(write_table(target / f"{output}.csv", table.columns, table.rows, command, stamp))

    conservation_rows = [[name, value, threshold, value < threshold] for name, value in drift.items()]
    result.files.append(
        write_table(
            target / "conservation.csv",
            ["quantity", "max_relative_drift", "threshold", "passed"],
            conservation_rows,
            command,
            stamp,
        )
    )
    if not result.conserved:
        logger.warning("Conservation drift above %.1e in %s", threshold, target)
    return result


def sweep_parameter_names(scenario: Scenario) -> tuple[str, ...]:
    """Names that a sweep may vary for this scenario."""
    params = scenario.parameters()
    model_fields = tuple(type(params).model_fields) if params is not None else ()
    return TIME_PARAMETERS + model_fields


def sweep(
    scenario: Scenario,
    name: str,
    values: Sequence[float],
    output_dir: Optional[Path] = None,
) -> list[RunResult]:
    """
    Run a scenario once per value of one parameter.

    Each run writes into the subdirectory NAME=value of the scenario's
    output directory.

    Raises:
        ScenarioError: If the name cannot be swept for this model
    """
    allowed = sweep_parameter_names(scenario)
    if name not in allowed:
        raise ScenarioError(f'Cannot sweep "{name}" for {scenario.model.value} (choose from {", ".join(allowed)})')
    base = Path(output_dir) if output_dir is not None else resolve_output_dir(scenario)
    results = []
    for value in values:
        variant = scenario.with_value(name, float(value))
        logger.info("Sweep %s = %s", name, format_label(value))
        results.append(run_scenario(variant, base / f"{name}={format_label(value)}", command="sweep"))
    return results
