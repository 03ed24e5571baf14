"""
Scenario file loading.
INI-style files with a [scenario] section and an optional [params] section.
"""
import configparser
import logging
from pathlib import Path

from pydantic import ValidationError

from selfswitch.exceptions import ScenarioError
from selfswitch.models.scenario import Scenario
from selfswitch.services.validation import validate_parameter_name

logger = logging.getLogger(__name__)

SCENARIO_SECTION = "scenario"
PARAMS_SECTION = "params"
SCENARIO_KEYS = {"model", "mode", "t_start", "t_end", "t_step", "stride", "outputs", "output_path"}


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """
    Parse scenario text.

    Args:
        text: File contents
        source: Name used in error messages

    Returns:
        Validated Scenario

    Raises:
        ScenarioError: If the file is malformed or fails validation
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ScenarioError(f"Malformed scenario file {source}: {e}") from e

    if not parser.has_section(SCENARIO_SECTION):
        raise ScenarioError(f"Scenario file {source} has no [{SCENARIO_SECTION}] section")
    for section in parser.sections():
        if section not in (SCENARIO_SECTION, PARAMS_SECTION):
            raise ScenarioError(f"Unknown section [{section}] in {source}")

    fields = dict(parser.items(SCENARIO_SECTION))
    unknown = set(fields) - SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"Unknown keys in [{SCENARIO_SECTION}]: {', '.join(sorted(unknown))}")

    params = dict(parser.items(PARAMS_SECTION)) if parser.has_section(PARAMS_SECTION) else {}
    for name in params:
        if not validate_parameter_name(name):
            raise ScenarioError(f'Invalid parameter name "{name}" in {source}')

    try:
        return Scenario(**fields, model_params=params)
    except ValidationError as e:
        raise ScenarioError(f"Invalid scenario {source}: {e}") from e


def load_scenario(path: Path) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        OSError: If the file cannot be read
        ScenarioError: If it does not validate
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    scenario = parse_scenario(text, source=str(path))
    logger.info("Loaded %s scenario from %s", scenario.model.value, path)
    return scenario
