"""
Grid and range parsing helpers for the command line.
"""
import math
import re

import numpy as np

from selfswitch.exceptions import ValidationFailure

_GRID_PATTERN = re.compile(r'^\s*(\d+)\s*[xX×]\s*(\d+)\s*$')


def parse_grid(text: str) -> tuple[int, int]:
    """
    Parse a grid resolution "NxM".

    Raises:
        ValidationFailure: If the text is malformed or an axis has fewer than 2 samples
    """
    match = _GRID_PATTERN.match(str(text))
    if not match:
        raise ValidationFailure(f'Grid must look like NxM, got "{text}"')
    n, m = int(match.group(1)), int(match.group(2))
    if n < 2 or m < 2:
        raise ValidationFailure(f"Grid needs at least 2 samples per axis, got {n}x{m}")
    return n, m


def parse_range(text: str) -> np.ndarray:
    """
    Parse an inclusive range "A:B:STEP".

    Values are A + i·STEP, so the same text always yields the same numbers.
    B is included when it lies on the lattice within a relative 1e-9.

    Raises:
        ValidationFailure: If the text is malformed or STEP does not move from A toward B
    """
    parts = str(text).split(':')
    if len(parts) != 3:
        raise ValidationFailure(f'Range must look like A:B:STEP, got "{text}"')
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as e:
        raise ValidationFailure(f'Range must look like A:B:STEP, got "{text}"') from e
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise ValidationFailure(f"Range bounds must be finite, got {text}")
    return lattice(start, stop, step)


def lattice(start: float, stop: float, step: float) -> np.ndarray:
    """
    Inclusive lattice start + i·step up to stop.

    Raises:
        ValidationFailure: If step does not move from start toward stop
    """
    if step == 0.0 or (stop - start) * step < 0.0:
        raise ValidationFailure(f"Step {step} does not lead from {start} to {stop}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return start + step * np.arange(count)


def format_label(value: float) -> str:
    """Short stable text for a swept value, used in directory names."""
    return format(float(value), ".12g")


def axis(bounds: tuple[float, float], samples: int) -> np.ndarray:
    """Uniform samples over a closed interval."""
    return np.linspace(bounds[0], bounds[1], samples)
