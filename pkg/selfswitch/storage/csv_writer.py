"""
CSV output.
Deterministic comma-separated files with a reproducibility stamp.
"""
import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from selfswitch import __version__
from selfswitch.config import settings

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Round-trip exact text for reals; other values pass through str()."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{settings.CSV_SIGNIFICANT_DIGITS}g")
    return str(value)


def stamp_lines(command: str, parameters: Mapping[str, Any]) -> list[str]:
    """
    Comment lines recording how a file was produced.

    No wall-clock time is recorded so that reruns produce identical bytes.
    """
    prefix = settings.CSV_COMMENT_PREFIX
    lines = [f"{prefix} selfswitch {__version__}", f"{prefix} command: {command}"]
    for key in sorted(parameters):
        lines.append(f"{prefix} {key} = {format_value(parameters[key])}")
    return lines


def write_table(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    command: str,
    parameters: Mapping[str, Any],
) -> Path:
    """
    Write a header row and data rows under a comment stamp.

    Args:
        path: Destination file (parent directories are created)
        columns: Column names
        rows: Row values, formatted with format_value
        command: Command recorded in the stamp
        parameters: Parameters recorded in the stamp

    Returns:
        The written path

    Raises:
        OSError: If the file cannot be written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in stamp_lines(command, parameters):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info("Wrote %d rows to %s", count, path)
    return path


def write_grid(
    path: Path,
    axis_names: tuple[str, str],
    axis1: np.ndarray,
    axis2: np.ndarray,
    values: np.ndarray,
    command: str,
    parameters: Mapping[str, Any],
    value_name: str = "value",
) -> Path:
    """
    Write a long-format grid: one (axis1, axis2, value) row per cell.

    values[i, j] belongs to (axis1[i], axis2[j]); axis1 varies slowest.
    """
    values = np.asarray(values)
    if values.shape != (len(axis1), len(axis2)):
        raise ValueError(f"Grid values have shape {values.shape}, axes give {(len(axis1), len(axis2))}")
    rows = ((a, b, values[i, j]) for i, a in enumerate(axis1) for j, b in enumerate(axis2))
    return write_table(path, [axis_names[0], axis_names[1], value_name], rows, command, parameters)
