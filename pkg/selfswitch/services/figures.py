"""
Figure Data Module
Long-format grids behind the six published plots.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from selfswitch.config import settings
from selfswitch.models.parameters import MutationParams, SwitchingProfile
from selfswitch.models.scenario import FigureJob
from selfswitch.services.observables import organism_entropies, position_density, switching_probabilities
from selfswitch.services.oscillator import OscillatorBasis, oscillator_table
from selfswitch.services.solutions import mutation3_family, switching_functions
from selfswitch.storage.csv_writer import write_grid
from selfswitch.utils.grids import axis

logger = logging.getLogger(__name__)


@dataclass
class FigureData:
    """values[i, j] belongs to (axis1[i], axis2[j])."""
    axis_names: tuple[str, str]
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    value_name: str
    parameters: dict[str, Any]


def _density_over_time_and_position(job: FigureJob) -> FigureData:
    params = MutationParams.critical()
    family = mutation3_family(params)
    times = axis(job.ranges["t"], job.grid[0])
    basis = OscillatorBasis(level_offset=params.k, x_grid=axis(job.ranges["x"], job.grid[1]))
    values = np.array([position_density(family(t), basis) for t in times])
    return FigureData(("t", "x"), times, basis.x_grid, values, "p", {"h": params.h, "alpha": params.alpha})


def _origin_density_over_time_and_feedback(job: FigureJob) -> FigureData:
    times = axis(job.ranges["t"], job.grid[0])
    strengths = axis(job.ranges["h"], job.grid[1])
    psi = oscillator_table([0, 1, 2], 0.0)
    values = np.empty((times.size, strengths.size))
    for j, h in enumerate(strengths):
        family = mutation3_family(MutationParams(h=h))
        for i, t in enumerate(times):
            values[i, j] = float((psi @ family(t).data @ psi).real)
    return FigureData(("t", "h"), times, strengths, values, "p0", {"alpha": 1.0})


def _entropies_over_time(job: FigureJob) -> FigureData:
    times = axis(job.ranges["t"], job.grid[0])
    values = np.array([organism_entropies(t) for t in times])
    return FigureData(("t", "particle"), times, np.array([1, 2]), values, "entropy", {})


def _switching_over_time_and_t1(job: FigureJob, component: str) -> FigureData:
    times = axis(job.ranges["t"], job.grid[0])
    controls = axis(job.ranges["t1"], job.grid[1])
    values = np.empty((times.size, controls.size))
    for j, t1 in enumerate(controls):
        values[:, j] = getattr(switching_functions(times, SwitchingProfile(t0=job.t0, t1=t1)), component)
    return FigureData(("t", "t1"), times, controls, values, component, {"t0": job.t0})


def _bound_over_time_and_t0(job: FigureJob) -> FigureData:
    times = axis(job.ranges["t"], job.grid[0])
    controls = axis(job.ranges["t0"], job.grid[1])
    values = np.empty((times.size, controls.size))
    for j, t0 in enumerate(controls):
        _, _, bound = switching_probabilities(times, SwitchingProfile(t0=t0, t1=job.t1))
        values[:, j] = bound
    return FigureData(("t", "t0"), times, controls, values, "bound", {"t1": job.t1})


def compute_figure(job: FigureJob) -> FigureData:
    """
    Evaluate the grid of one figure.

    1: position density of the critical mutation over (t, x)
    2: density at x = 0 over (t, h) for h₀ ≤ h ≤ 2.45
    3: particle entropies of the organism over t
    4, 5: F and F₁ over (t, t₁) at fixed t₀
    6: uncertainty bound over (t, t₀) at fixed t₁
    """
    builders = {
        1: _density_over_time_and_position,
        2: _origin_density_over_time_and_feedback,
        3: _entropies_over_time,
        4: lambda j: _switching_over_time_and_t1(j, "F"),
        5: lambda j: _switching_over_time_and_t1(j, "F1"),
        6: _bound_over_time_and_t0,
    }
    data = builders[job.figure_id](job)
    logger.info("Figure %d: %dx%d grid", job.figure_id, data.axis1.size, data.axis2.size)
    return data


def reproduce_figure(job: FigureJob, output_dir: Optional[Path] = None) -> Path:
    """
    Compute a figure grid and write it as figure<N>.csv.

    Returns:
        Path of the written file

    Raises:
        OSError: If the file cannot be written
    """
    data = compute_figure(job)
    target = Path(output_dir) if output_dir is not None else Path(settings.OUTPUT_DIR)
    stamp = {
        "figure": job.figure_id,
        "grid": f"{job.grid[0]}x{job.grid[1]}",
        **{f"{axis_name}_range": f"{lo}:{hi}" for axis_name, (lo, hi) in job.ranges.items()},
        **data.parameters,
    }
    return write_grid(
        target / f"figure{job.figure_id}.csv",
        data.axis_names,
        data.axis1,
        data.axis2,
        data.values,
        command="figure",
        parameters=stamp,
        value_name=data.value_name,
    )
