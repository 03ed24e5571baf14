"""
selfswitch - Main Application Entry Point

Command-line front end for the self-switching solutions of the nonlinear
von Neumann equation: scenario runs, parameter sweeps, figure data and the
verification suite. Results are written as reproducible CSV files.

Exit codes:
- 0 success
- 1 verification failed
- 2 invalid input
- 3 numerical failure
- 4 I/O failure

License: MIT
"""

import logging

import click
import colorama
from pydantic import ValidationError

from selfswitch import __version__
from selfswitch.config import settings
from selfswitch.exceptions import SelfSwitchError
from selfswitch.routes import reports, simulation

VALIDATION_EXIT = 2
IO_EXIT = 4


class SelfSwitchCLI(click.Group):
    """Click group that turns package errors into stable exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except SelfSwitchError as e:
            click.secho(f"❌ {e}", fg="red", err=True)
            ctx.exit(e.exit_code)
        except ValidationError as e:
            click.secho(f"❌ Invalid input: {e}", fg="red", err=True)
            ctx.exit(VALIDATION_EXIT)
        except OSError as e:
            click.secho(f"❌ I/O failure: {e}", fg="red", err=True)
            ctx.exit(IO_EXIT)


def configure_logging(verbosity: int) -> None:
    """WARNING by default, INFO with -v, DEBUG with -vv."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger("selfswitch").setLevel(level)


# --------------------------------------------------------------------------
# Command Group
# --------------------------------------------------------------------------

@click.group(cls=SelfSwitchCLI)
@click.option("-v", "--verbose", count=True, help="Increase log output (-v info, -vv debug).")
@click.version_option(__version__, prog_name="selfswitch")
def cli(verbose: int):
    """Simulate and verify self-switching solutions of iρ̇ = [H, f(ρ)]."""
    colorama.just_fix_windows_console()
    configure_logging(verbose)
    settings.describe_output_dir()


# --------------------------------------------------------------------------
# Command Registration
# --------------------------------------------------------------------------

cli.add_command(simulation.run_command)
cli.add_command(simulation.sweep_command)
cli.add_command(reports.figure_command)
cli.add_command(reports.verify_command)


if __name__ == "__main__":
    cli()
