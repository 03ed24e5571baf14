"""
Simulation Commands
Run a scenario file once, or once per value of a swept parameter.
"""
import logging
from pathlib import Path
from typing import Optional

import click

from selfswitch.exceptions import ScenarioError
from selfswitch.services.scenarios import RunResult, resolve_output_dir, run_scenario, sweep
from selfswitch.services.validation import validate_parameter_name
from selfswitch.storage.scenario_loader import load_scenario
from selfswitch.utils.grids import parse_range

logger = logging.getLogger(__name__)


def _report(result: RunResult) -> None:
    for path in result.files:
        click.echo(f"✅ wrote {path}")
    worst = max(result.drift.values(), default=0.0)
    if result.conserved:
        click.echo(f"📊 max conservation drift {worst:.3e} (threshold {result.threshold:.0e})")
    else:
        click.secho(f"⚠️  conservation drift {worst:.3e} exceeds {result.threshold:.0e}", fg="yellow")


@click.command("run")
@click.argument("scenario_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Base output directory (overrides SELFSWITCH_OUTPUT_DIR).")
def run_command(scenario_file: Path, out_dir: Optional[Path]):
    """Evaluate a scenario and write one CSV per requested output."""
    scenario = load_scenario(scenario_file)
    target = resolve_output_dir(scenario, out_dir)
    click.echo(f"🚀 Running {scenario.model.value} scenario ({scenario.mode.value}) "
               f"on [{scenario.t_start:g}, {scenario.t_end:g}] step {scenario.t_step:g}")
    _report(run_scenario(scenario, target))


@click.command("sweep")
@click.option("--param", "name", required=True, help="Model parameter, t_start, t_end or t_step.")
@click.option("--range", "value_range", required=True, help="Inclusive values A:B:STEP.")
@click.argument("scenario_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Base output directory (overrides SELFSWITCH_OUTPUT_DIR).")
def sweep_command(name: str, value_range: str, scenario_file: Path, out_dir: Optional[Path]):
    """Run a scenario once per value of one parameter, each into NAME=value/."""
    if not validate_parameter_name(name):
        raise ScenarioError(f'Invalid parameter name "{name}"')
    values = parse_range(value_range)
    scenario = load_scenario(scenario_file)
    target = resolve_output_dir(scenario, out_dir)
    click.echo(f"🚀 Sweeping {name} over {len(values)} values for {scenario.model.value}")
    for result in sweep(scenario, name, values, target):
        click.echo(f"📁 {result.output_dir}")
        _report(result)
