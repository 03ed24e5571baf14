import math

import numpy as np
import pytest

from conftest import read_csv
from selfswitch.exceptions import ScenarioError
from selfswitch.models.scenario import FigureJob
from selfswitch.services.figures import compute_figure, reproduce_figure
from selfswitch.services.scenarios import resolve_output_dir, run_scenario, sample_times, sweep, sweep_parameter_names
from selfswitch.storage.scenario_loader import parse_scenario


def scenario(
    model: str, outputs: str, window: str = "-1, 1, 0.5", params: str = "", mode: str = "closed_form", stride: str = ""
):
    start, end, step = (v.strip() for v in window.split(","))
    text = (
        f"[scenario]\nmodel = {model}\nmode = {mode}\n"
        f"t_start = {start}\nt_end = {end}\nt_step = {step}\noutputs = {outputs}\n"
    )
    if stride:
        text += f"stride = {stride}\n"
    if params:
        text += f"[params]\n{params}\n"
    return parse_scenario(text)


class TestRuns:
    def test_organism_entropy(self, tmp_path):
        result = run_scenario(scenario("organism", "entropy, ppt"), tmp_path)
        _, rows = read_csv(tmp_path / "entropy.csv")
        assert [float(r["t"]) for r in rows] == [-1.0, -0.5, 0.0, 0.5, 1.0]
        origin = rows[2]
        assert float(origin["S1"]) == pytest.approx(math.log(2.0), abs=1e-12)
        assert float(origin["S2"]) == pytest.approx(0.63383, abs=1e-4)
        _, ppt = read_csv(tmp_path / "ppt.csv")
        assert all(r["positive"] == "1" for r in ppt)
        assert result.conserved
        assert {p.name for p in result.files} == {"entropy.csv", "ppt.csv", "conservation.csv"}

    def test_conservation_file(self, tmp_path):
        run_scenario(scenario("organism", "trace"), tmp_path)
        comments, rows = read_csv(tmp_path / "conservation.csv")
        assert "# command: run" in comments
        assert "# model = organism" in comments
        assert {r["quantity"] for r in rows} >= {"energy", "c1", "c2"}
        assert all(r["passed"] == "1" for r in rows)

    def test_mutation_without_feedback_keeps_moduli(self, tmp_path):
        run_scenario(scenario("mutation3", "matrix, residual", "0, 4, 1", "h = 0"), tmp_path)
        _, rows = read_csv(tmp_path / "matrix.csv")
        moduli = []
        for row in rows:
            moduli.append([
                math.hypot(float(row[f"re_{i}_{j}"]), float(row[f"im_{i}_{j}"])) for i in range(3) for j in range(3)
            ])
        np.testing.assert_allclose(moduli, np.tile(moduli[0], (len(moduli), 1)), atol=1e-12)
        _, residuals = read_csv(tmp_path / "residual.csv")
        assert max(float(r["residual"]) for r in residuals) < 1e-6

    def test_multispecies_outputs(self, tmp_path):
        run_scenario(scenario("multispecies", "propositions, uncertainty, switching", "-20, 20, 10"), tmp_path)
        _, uncertainty = read_csv(tmp_path / "uncertainty.csv")
        assert all(r["satisfied"] == "1" for r in uncertainty)
        _, switching = read_csv(tmp_path / "switching.csv")
        for row in switching:
            F, F0, F1 = (float(row[k]) for k in ("F", "F0", "F1"))
            assert F0 ** 2 + F1 ** 2 == pytest.approx(F * (1 - F), abs=1e-12)

    def test_switching_needs_real_betas(self, tmp_path):
        run = scenario("multispecies", "switching", "-1, 1, 1", "betas = 1, 1j")
        with pytest.raises(ScenarioError):
            run_scenario(run, tmp_path)

    def test_integrated_run_follows_closed_form(self, tmp_path):
        run = scenario("organism", "residual, trace", "-0.25, 0.25, 0.0005", mode="integrate", stride="1")
        result = run_scenario(run, tmp_path)
        _, rows = read_csv(tmp_path / "residual.csv")
        assert len(rows) == 1001
        assert max(float(r["closed_form_error"]) for r in rows) < 1e-6
        assert result.threshold == 1e-5
        assert result.conserved
        assert (tmp_path / "conservation.csv").exists()

    def test_integrated_run_logs_every_tenth_step_by_default(self, tmp_path):
        run = scenario("organism", "trace", "-0.25, 0.25, 0.0005", mode="integrate")
        assert run.stride == 10
        run_scenario(run, tmp_path)
        _, rows = read_csv(tmp_path / "trace.csv")
        assert len(rows) == 101
        assert float(rows[1]["t"]) == pytest.approx(-0.245)

    def test_integrated_run_honours_stride(self, tmp_path):
        run = scenario("organism", "trace", "-0.25, 0.25, 0.0005", mode="integrate", stride="300")
        run_scenario(run, tmp_path)
        comments, rows = read_csv(tmp_path / "trace.csv")
        assert [float(r["t"]) for r in rows] == pytest.approx([-0.25, -0.1, 0.05, 0.2, 0.25])
        assert any("stride" in line for line in comments)

    @pytest.mark.parametrize("stride", ["0", "2.5"])
    def test_invalid_stride(self, stride):
        with pytest.raises(ScenarioError):
            scenario("organism", "trace", mode="integrate", stride=stride)

    def test_rerun_is_byte_identical(self, tmp_path):
        run = scenario("mutation3", "density_origin, spectrum", params="h = 1")
        run_scenario(run, tmp_path / "a")
        run_scenario(run, tmp_path / "b")
        for name in ("density_origin.csv", "spectrum.csv", "conservation.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_output_dir_defaults_to_model_name(self, tmp_path):
        assert resolve_output_dir(scenario("organism", "trace"), tmp_path) == tmp_path / "organism"

    def test_sample_times_include_end(self):
        np.testing.assert_allclose(sample_times(scenario("organism", "trace", "0, 1, 0.25")), [0, 0.25, 0.5, 0.75, 1])


class TestSweep:
    def test_one_directory_per_value(self, tmp_path):
        base = scenario("mutation3", "trace", "0, 1, 0.5", "h = 0")
        results = sweep(base, "h", [0.0, 0.5, 1.0], tmp_path)
        assert [r.output_dir.name for r in results] == ["h=0", "h=0.5", "h=1"]
        comments, _ = read_csv(tmp_path / "h=0.5" / "trace.csv")
        assert "# command: sweep" in comments
        assert "# h = 0.5" in comments

    def test_names(self):
        names = sweep_parameter_names(scenario("mutation3", "trace", params="h = 1"))
        assert {"t_start", "t_step", "h", "alpha", "k"} <= set(names)
        assert sweep_parameter_names(scenario("organism", "trace")) == ("t_start", "t_end", "t_step")

    def test_rejects_unknown_parameter(self, tmp_path):
        with pytest.raises(ScenarioError):
            sweep(scenario("organism", "trace"), "h", [0.0], tmp_path)


class TestFigures:
    def test_density_is_normalized_at_every_time(self):
        data = compute_figure(FigureJob(figure_id=1, grid=(41, 81)))
        assert data.values.shape == (41, 81)
        integrals = np.trapezoid(data.values, data.axis2, axis=1)
        np.testing.assert_allclose(integrals, 1.0, atol=1e-3)

    def test_origin_density_grid(self):
        data = compute_figure(FigureJob(figure_id=2, grid=(5, 4)))
        assert data.axis_names == ("t", "h")
        assert np.all(data.values >= -1e-12)

    def test_entropies(self):
        data = compute_figure(FigureJob(figure_id=3, grid=(11, 2)))
        np.testing.assert_array_equal(data.axis2, [1, 2])
        assert data.values[5, 0] == pytest.approx(math.log(2.0))

    def test_switching_rises_in_time(self):
        data = compute_figure(FigureJob(figure_id=4, grid=(31, 5)))
        assert np.all(np.diff(data.values, axis=0) >= 0.0)
        f1 = compute_figure(FigureJob(figure_id=5, grid=(31, 5)))
        assert np.all((f1.values >= 0.0) & (f1.values <= 0.5))

    def test_bound_settles_in_the_future(self):
        data = compute_figure(FigureJob(figure_id=6, grid=(241, 201)))
        column = int(np.argmin(np.abs(data.axis2)))
        assert data.axis1[-1] == 60.0
        assert data.values[-1, column] == pytest.approx(0.010811, abs=1e-4)
        assert data.values[0, column] < 1e-6

    def test_written_file(self, tmp_path):
        path = reproduce_figure(FigureJob(figure_id=4, grid=(3, 2), t0=10.0), tmp_path)
        comments, rows = read_csv(path)
        assert path.name == "figure4.csv"
        assert "# grid = 3x2" in comments
        assert "# t0 = 10" in comments
        assert list(rows[0]) == ["t", "t1", "F"]
        assert len(rows) == 6
