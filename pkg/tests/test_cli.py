import pytest
from click.testing import CliRunner

from main import cli

ORGANISM = """
[scenario]
model = organism
t_start = -1
t_end = 1
t_step = 0.5
outputs = entropy, trace
"""


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "selfswitch" in result.output


def test_run_writes_identical_files(runner, write_scenario, tmp_path):
    path = write_scenario(ORGANISM)
    out = tmp_path / "out"
    first = runner.invoke(cli, ["run", str(path), "--out", str(out)])
    assert first.exit_code == 0, first.output
    written = (out / "organism" / "entropy.csv").read_bytes()
    second = runner.invoke(cli, ["run", str(path), "--out", str(out)])
    assert second.exit_code == 0
    assert (out / "organism" / "entropy.csv").read_bytes() == written


def test_missing_scenario_file(runner, tmp_path):
    result = runner.invoke(cli, ["run", str(tmp_path / "absent.ini")])
    assert result.exit_code == 4


def test_empty_outputs(runner, write_scenario, tmp_path):
    path = write_scenario(ORGANISM.replace("entropy, trace", ""))
    result = runner.invoke(cli, ["run", str(path), "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_sweep(runner, write_scenario, tmp_path):
    path = write_scenario(ORGANISM)
    result = runner.invoke(cli, ["sweep", "--param", "t_step", "--range", "0.25:0.5:0.25", str(path), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "organism" / "t_step=0.25" / "entropy.csv").exists()
    assert (tmp_path / "organism" / "t_step=0.5" / "entropy.csv").exists()


def test_sweep_rejects_bad_name(runner, write_scenario, tmp_path):
    result = runner.invoke(cli, ["sweep", "--param", "H-0", "--range", "0:1:1", str(write_scenario(ORGANISM))])
    assert result.exit_code == 2


def test_unknown_figure(runner, tmp_path):
    assert runner.invoke(cli, ["figure", "7", "--out", str(tmp_path)]).exit_code == 2


def test_small_figure(runner, tmp_path):
    result = runner.invoke(cli, ["figure", "4", "--grid", "5x5", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "figure4.csv").exists()


def test_bad_grid(runner, tmp_path):
    assert runner.invoke(cli, ["figure", "4", "--grid", "5", "--out", str(tmp_path)]).exit_code == 2


def test_quick_verification_passes(runner):
    result = runner.invoke(cli, ["verify", "--quick"])
    assert result.exit_code == 0, result.output
    assert "checks passed" in result.output


def test_injected_fault_fails_verification(runner):
    result = runner.invoke(cli, ["verify", "--quick", "--inject-fault", "1e-3"])
    assert result.exit_code == 1
    assert "❌ organism_residual" in result.output


def test_full_verification_passes(runner):
    result = runner.invoke(cli, ["verify", "--full"])
    assert result.exit_code == 0, result.output
    for name in ("integrator_order_ratio_high", "integrator_organism_order_ratio", "integrator_endpoint"):
        assert name in result.output
