"""
Integrated trajectories and their conservation log.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from selfswitch.config import settings
from selfswitch.exceptions import ValidationFailure
from selfswitch.models.operators import DensityState


@dataclass(frozen=True)
class DriftRecord:
    time: float
    energy: float
    moments: tuple[float, ...]  # Tr ρ, Tr ρ², …


def relative_drift(values: Sequence[float], floor: float = settings.DRIFT_SCALE_FLOOR) -> float:
    """
    max |q − q₀| / max(|q₀|, floor).

    The floor keeps the measure finite when q₀ vanishes; with the default of
    one, quantities below one are compared absolutely.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - values[0])) / max(abs(values[0]), floor))


def drift_summary(records: Sequence[DriftRecord]) -> dict[str, float]:
    """Maximum relative drift of h and of every logged moment."""
    if not records:
        return {}
    summary = {"energy": relative_drift([r.energy for r in records])}
    for n in range(len(records[0].moments)):
        summary[f"c{n + 1}"] = relative_drift([r.moments[n] for r in records])
    return summary


class Trajectory:
    """Ordered (t, state) samples with a conserved-quantity log."""

    def __init__(self, times: Sequence[float], states: Sequence[DensityState], drift_log: Sequence[DriftRecord]):
        times = np.asarray(times, dtype=float)
        if len(times) != len(states) or len(states) != len(drift_log):
            raise ValidationFailure("Trajectory times, states and drift log must have equal length")
        if np.any(np.diff(times) <= 0.0):
            raise ValidationFailure("Trajectory times must be strictly increasing")
        times.flags.writeable = False
        self.times = times
        self.states: list[DensityState] = list(states)
        self.drift_log: list[DriftRecord] = list(drift_log)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final_state(self) -> DensityState:
        return self.states[-1]

    def max_relative_drift(self) -> dict[str, float]:
        return drift_summary(self.drift_log)

    def spectrum_deviation(self) -> float:
        """Largest eigenvalue change over the trajectory, relative to the initial spectral radius."""
        reference = self.states[0].eigenvalues
        scale = max(float(np.max(np.abs(reference))), 1e-300)
        return max(float(np.max(np.abs(s.eigenvalues - reference))) for s in self.states) / scale
