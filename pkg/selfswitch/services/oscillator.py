"""
Harmonic oscillator eigenfunctions.
Normalized Hermite functions by the stable three-term recurrence.
"""
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from selfswitch.config import settings
from selfswitch.exceptions import ValidationFailure


def _check_level(n: int) -> None:
    if not 0 <= n <= settings.MAX_OSCILLATOR_LEVEL:
        raise ValidationFailure(f"Oscillator level must be in [0, {settings.MAX_OSCILLATOR_LEVEL}], got {n}")


def oscillator_table(levels: Union[int, Sequence[int]], x: Union[float, np.ndarray]) -> np.ndarray:
    """
    Evaluate ψ_n(x) for a block of levels.

    ψ₀ = π^{−1/4} e^{−x²/2}, ψ₁ = √2 x ψ₀ and
    ψ_{n+1} = x √(2/(n+1)) ψ_n − √(n/(n+1)) ψ_{n−1}.

    Args:
        levels: Highest level (rows 0…levels) or an explicit list of levels
        x: Evaluation points

    Returns:
        Array of shape (len(levels),) + x.shape

    Raises:
        ValidationFailure: If a level exceeds MAX_OSCILLATOR_LEVEL
    """
    wanted = list(range(levels + 1)) if isinstance(levels, int) else [int(n) for n in levels]
    if not wanted:
        raise ValidationFailure("At least one oscillator level is required")
    for n in wanted:
        _check_level(n)
    x = np.asarray(x, dtype=float)
    top = max(wanted)
    table = np.empty((top + 1,) + x.shape)
    table[0] = np.pi ** -0.25 * np.exp(-x ** 2 / 2.0)
    if top >= 1:
        table[1] = np.sqrt(2.0) * x * table[0]
    for n in range(1, top):
        table[n + 1] = x * np.sqrt(2.0 / (n + 1)) * table[n] - np.sqrt(n / (n + 1)) * table[n - 1]
    return table[wanted]


def oscillator_eigenfunction(n: int, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """ψ_n(x) = (√π 2ⁿ n!)^{−1/2} H_n(x) e^{−x²/2}."""
    _check_level(n)
    values = oscillator_table([n], x)[0]
    return float(values) if np.ndim(values) == 0 else values


class OscillatorBasis:
    """
    Consecutive oscillator levels k, k+1, … sampled on a position grid.

    Args:
        level_offset: Lowest level k
        x_grid: Strictly ascending positions (defaults to the configured grid)
    """

    def __init__(self, level_offset: int = 0, x_grid: Union[Sequence[float], np.ndarray, None] = None):
        if level_offset < 0:
            raise ValidationFailure(f"Level offset must be non-negative, got {level_offset}")
        if x_grid is None:
            x_grid = np.linspace(settings.X_GRID_MIN, settings.X_GRID_MAX, settings.X_GRID_POINTS)
        grid = np.asarray(x_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValidationFailure("x_grid needs at least two points")
        if np.any(np.diff(grid) <= 0.0):
            raise ValidationFailure("x_grid must be strictly ascending")
        grid.flags.writeable = False
        self.level_offset = level_offset
        self.x_grid = grid
        self._tables: dict[int, np.ndarray] = {}

    def table(self, count: int) -> np.ndarray:
        """ψ_{k}, …, ψ_{k+count−1} on the grid, shape (count, len(x_grid))."""
        if count not in self._tables:
            values = oscillator_table(list(range(self.level_offset, self.level_offset + count)), self.x_grid)
            values.flags.writeable = False
            self._tables[count] = values
        return self._tables[count]

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid quadrature over the grid."""
        return float(integrate.trapezoid(values, self.x_grid))

    def __repr__(self) -> str:
        return f"OscillatorBasis(k={self.level_offset}, points={self.x_grid.size})"
