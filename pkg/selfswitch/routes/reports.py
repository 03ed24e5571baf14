"""
Report Commands
Figure data grids and the verification suite.
"""
import logging
from pathlib import Path
from typing import Optional

import click

from selfswitch.config import settings
from selfswitch.models.scenario import FigureJob
from selfswitch.services.figures import reproduce_figure
from selfswitch.services.verification import VerifyLevel, verify_suite
from selfswitch.utils.grids import parse_grid

logger = logging.getLogger(__name__)


@click.command("figure")
@click.argument("figure_id", type=int)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Output directory (overrides SELFSWITCH_OUTPUT_DIR).")
@click.option("--grid", "grid", default=None, help="Samples per axis as NxM (default 201x201).")
@click.option("--t0", type=float, default=settings.FIGURE_T0, show_default=True, help="Fixed t0 of figures 4 and 5.")
@click.option("--t1", type=float, default=settings.FIGURE_T1, show_default=True, help="Fixed t1 of figure 6.")
def figure_command(figure_id: int, out_dir: Optional[Path], grid: Optional[str], t0: float, t1: float):
    """Write the data grid behind figure 1-6 as long-format CSV."""
    job = FigureJob(figure_id=figure_id, grid=parse_grid(grid) if grid else settings.FIGURE_GRID, t0=t0, t1=t1)
    click.echo(f"🚀 Computing figure {job.figure_id} on a {job.grid[0]}x{job.grid[1]} grid")
    path = reproduce_figure(job, out_dir)
    click.echo(f"✅ wrote {path}")


@click.command("verify")
@click.option("--quick", "level", flag_value=VerifyLevel.QUICK.value, default=VerifyLevel.QUICK.value, help="Coarse sampling (default).")
@click.option("--full", "level", flag_value=VerifyLevel.FULL.value, help="Dense sampling plus integrator checks.")
@click.option("--inject-fault", type=float, default=0.0, hidden=True,
              help="Perturb the organism state before its residual check.")
def verify_command(level: str, inject_fault: float):
    """Run every invariant check; exit 1 if any fails."""
    click.echo(f"🔍 Running {level} verification suite")
    report = verify_suite(VerifyLevel(level), organism_fault=inject_fault)
    for check in report.checks:
        mark = "✅" if check.passed else "❌"
        click.echo(f"{mark} {check.name:<34} {check.measured: .6e} {check.relation} {check.threshold:.6e}")
    if report.passed:
        click.secho(f"🎉 all {len(report.checks)} checks passed", fg="green")
    else:
        click.secho(f"❌ {len(report.failures)} of {len(report.checks)} checks failed", fg="red", err=True)
    report.raise_for_failures()
