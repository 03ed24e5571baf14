"""Shared fixtures."""
import csv
from pathlib import Path

import pytest

from selfswitch.models.feedback import FeedbackPolynomial
from selfswitch.models.parameters import MultiSpeciesConfig, MutationParams
from selfswitch.services.solutions import organism_hamiltonian, organism_solution


@pytest.fixture
def organism_state():
    return organism_solution(0.3)


@pytest.fixture
def organism_system():
    """(H, f) of the two-qubit organism."""
    return organism_hamiltonian(), FeedbackPolynomial.square()


@pytest.fixture
def worked_example():
    return MultiSpeciesConfig.worked_example()


@pytest.fixture
def critical_mutation():
    return MutationParams.critical()


@pytest.fixture
def write_scenario(tmp_path):
    """Write scenario text to a file and return its path."""
    def _write(text: str, name: str = "scenario.ini") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write


def read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Comment lines and data rows of a written CSV."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    comments = [line for line in lines if line.startswith("#")]
    rows = list(csv.DictReader(line for line in lines if not line.startswith("#")))
    return comments, rows
