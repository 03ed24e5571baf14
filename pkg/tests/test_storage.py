import numpy as np
import pytest

from conftest import read_csv
from selfswitch import __version__
from selfswitch.exceptions import ScenarioError, ValidationFailure
from selfswitch.models.scenario import ModelName, RunMode
from selfswitch.storage.csv_writer import format_value, stamp_lines, write_grid, write_table
from selfswitch.storage.scenario_loader import load_scenario, parse_scenario
from selfswitch.utils.grids import format_label, lattice, parse_grid, parse_range

MUTATION_SCENARIO = """
[scenario]
model = mutation3
t_start = -2
t_end = 2
t_step = 0.5
outputs = trace, density_origin  ; comma separated

[params]
h = 0.5
"""


class TestCsvWriter:
    def test_reals_round_trip(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert float(format_value(np.float64(1 / 3))) == 1 / 3

    def test_flags_and_integers(self):
        assert format_value(True) == "1"
        assert format_value(np.bool_(False)) == "0"
        assert format_value(np.int64(7)) == "7"
        assert format_value("organism") == "organism"

    def test_stamp_is_sorted_and_timeless(self):
        lines = stamp_lines("run", {"b": 2, "a": 0.5})
        assert lines == [f"# selfswitch {__version__}", "# command: run", "# a = 0.5", "# b = 2"]

    def test_write_table(self, tmp_path):
        path = write_table(tmp_path / "nested" / "out.csv", ["t", "value"], [[0.0, 1.5], [1.0, 2.5]], "run", {"h": 1.0})
        comments, rows = read_csv(path)
        assert "# h = 1" in comments
        assert rows == [{"t": "0", "value": "1.5"}, {"t": "1", "value": "2.5"}]
        assert path.read_bytes().count(b"\r") == 0

    def test_write_grid_is_long_format(self, tmp_path):
        values = np.arange(6.0).reshape(2, 3)
        path = write_grid(tmp_path / "g.csv", ("t", "x"), [0.0, 1.0], [5.0, 6.0, 7.0], values, "figure", {}, "p")
        _, rows = read_csv(path)
        assert len(rows) == 6
        assert rows[4] == {"t": "1", "x": "6", "p": "4"}

    def test_write_grid_checks_shape(self, tmp_path):
        with pytest.raises(ValueError):
            write_grid(tmp_path / "g.csv", ("t", "x"), [0.0], [1.0, 2.0], np.zeros((2, 2)), "figure", {})


class TestScenarioLoader:
    def test_parses_sections(self):
        scenario = parse_scenario(MUTATION_SCENARIO)
        assert scenario.model is ModelName.MUTATION3
        assert scenario.mode is RunMode.CLOSED_FORM
        assert scenario.outputs == ("trace", "density_origin")
        assert scenario.parameters().h == 0.5

    def test_missing_scenario_section(self):
        with pytest.raises(ScenarioError, match="no \\[scenario\\]"):
            parse_scenario("[params]\nh = 1\n")

    @pytest.mark.parametrize("text", [
        MUTATION_SCENARIO + "\n[extra]\nx = 1\n",
        MUTATION_SCENARIO.replace("model = mutation3", "model = mutation3\ncolour = red"),
        MUTATION_SCENARIO.replace("h = 0.5", "1h = 0.5"),
        MUTATION_SCENARIO.replace("density_origin", "entropy"),
        MUTATION_SCENARIO.replace("h = 0.5", "h = abc"),
        "[scenario\nmodel = organism\n",
    ])
    def test_rejects_invalid_files(self, text):
        with pytest.raises(ScenarioError):
            parse_scenario(text)

    def test_load_reads_file(self, write_scenario):
        assert load_scenario(write_scenario(MUTATION_SCENARIO)).t_step == 0.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_scenario(tmp_path / "absent.ini")


class TestGrids:
    def test_grid(self):
        assert parse_grid("41x81") == (41, 81)
        assert parse_grid(" 5 X 7 ") == (5, 7)

    @pytest.mark.parametrize("text", ["41", "1x5", "ax3", "5x5x5"])
    def test_bad_grid(self, text):
        with pytest.raises(ValidationFailure):
            parse_grid(text)

    def test_range_is_inclusive_lattice(self):
        np.testing.assert_array_equal(parse_range("0:1:0.5"), [0.0, 0.5, 1.0])
        assert parse_range("0:1:0.1").size == 11
        np.testing.assert_array_equal(parse_range("2:0:-1"), [2.0, 1.0, 0.0])

    @pytest.mark.parametrize("text", ["0:1", "0:1:0", "0:1:-0.5", "a:1:1", "0:inf:1"])
    def test_bad_range(self, text):
        with pytest.raises(ValidationFailure):
            parse_range(text)

    def test_lattice_stops_before_overshoot(self):
        np.testing.assert_allclose(lattice(0.0, 1.0, 0.3), [0.0, 0.3, 0.6, 0.9])

    def test_labels(self):
        assert format_label(0.5) == "0.5"
        assert format_label(3 * 0.1) == "0.3"
        assert format_label(1.0) == "1"
