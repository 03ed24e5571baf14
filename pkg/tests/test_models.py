import math

import numpy as np
import pytest
from pydantic import ValidationError

from selfswitch.exceptions import DimensionMismatchError, LayoutError, StateInvariantError, ValidationFailure
from selfswitch.models.feedback import FeedbackClass, FeedbackPolynomial
from selfswitch.models.operators import CompositeLayout, DensityState, OperatorMatrix, pauli
from selfswitch.models.parameters import (
    H0,
    DarbouxParameters,
    MultiSpeciesConfig,
    MutationParams,
    SwitchingProfile,
    profile_from_betas,
)
from selfswitch.models.scenario import FigureJob, ModelName, RunMode, Scenario
from selfswitch.models.trajectory import DriftRecord, Trajectory, relative_drift


class TestOperatorMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            OperatorMatrix(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(StateInvariantError):
            OperatorMatrix([[np.nan, 0], [0, 1]])

    def test_is_immutable(self):
        op = OperatorMatrix.identity(2)
        with pytest.raises(ValueError):
            op.data[0, 0] = 5

    def test_arithmetic(self):
        x, z = pauli("x"), pauli("z")
        assert (x @ x).allclose(OperatorMatrix.identity(2), atol=1e-15)
        assert (2 * z - z).allclose(z, atol=0)
        assert (x + z).trace() == 0
        assert pauli("y").dagger().allclose(pauli("y"), atol=0)

    def test_unknown_pauli(self):
        with pytest.raises(ValueError):
            pauli("w")


class TestDensityState:
    def test_accepts_unnormalized_state(self):
        state = DensityState(np.diag([3.0, 1.0]))
        assert state.trace == 4.0
        assert state.normalized().trace == pytest.approx(1.0)
        np.testing.assert_allclose(state.eigenvalues, [1.0, 3.0])

    @pytest.mark.parametrize("matrix", [
        np.diag([1.0, -0.5]),
        np.array([[1.0, 1.0], [0.0, 1.0]]),
        np.zeros((2, 2)),
    ])
    def test_rejects_invalid_states(self, matrix):
        with pytest.raises(StateInvariantError):
            DensityState(matrix)


def test_composite_layout():
    layout = CompositeLayout((2, 3))
    assert layout.dim == 6 and layout.n_factors == 2
    with pytest.raises(LayoutError):
        CompositeLayout((2, 0))
    with pytest.raises(LayoutError):
        layout.check(5)


class TestFeedbackPolynomial:
    @pytest.mark.parametrize("coefficients, kind, scale", [
        ((0.0, 0.0, 1.0), FeedbackClass.STRICT, 1.0),
        ((0.0, 0.75, 0.25), FeedbackClass.STRICT, 1.0),
        ((0.0, 0.0, 2.0), FeedbackClass.PROPORTIONAL, 2.0),
        ((1.0, 1.0), FeedbackClass.INVALID, 2.0),
        ((0.0, 1.0, -1.0), FeedbackClass.INVALID, 0.0),
    ])
    def test_classification(self, coefficients, kind, scale):
        classification = FeedbackPolynomial(coefficients).classification
        assert classification.kind is kind
        assert classification.scale == pytest.approx(scale)

    def test_quadratic_is_strict_for_any_strength(self):
        assert FeedbackPolynomial.quadratic(-0.25).classification.kind is FeedbackClass.STRICT

    def test_apply_matches_direct_evaluation(self):
        rho = np.array([[2.0, 1j], [-1j, 1.0]])
        f = FeedbackPolynomial((0.0, 3.0, 0.0, 2.0))
        np.testing.assert_allclose(f.apply(rho), 3.0 * rho + 2.0 * rho @ rho @ rho)
        assert f.degree == 3
        assert not f.is_affine

    def test_empty_coefficients(self):
        with pytest.raises(ValidationFailure):
            FeedbackPolynomial(())


def test_relative_drift_is_absolute_below_one():
    assert relative_drift([0.5, 0.5 + 1e-3]) == pytest.approx(1e-3)
    assert relative_drift([100.0, 101.0]) == pytest.approx(0.01)


def test_relative_drift_stays_finite_for_vanishing_start():
    assert relative_drift([0.0, 1e-9, -2e-9]) == pytest.approx(2e-9)
    assert relative_drift([-4.0, -4.0 + 4e-6]) == pytest.approx(1e-6)


def test_relative_drift_floor_is_adjustable():
    assert relative_drift([0.5, 0.5 + 1e-3], floor=1e-12) == pytest.approx(2e-3)
    assert relative_drift([0.0, 1e-3], floor=1e-2) == pytest.approx(0.1)


def test_trajectory_requires_increasing_times():
    state = DensityState(np.eye(2))
    record = DriftRecord(0.0, 1.0, (2.0,))
    with pytest.raises(ValidationFailure):
        Trajectory([0.0, 0.0], [state, state], [record, record])


class TestParameters:
    def test_darboux_parameters_parse_complex_text(self):
        params = DarbouxParameters(nu="0-1j", a=5, chi0=["1+0j", "0+2j"])
        assert params.nu == -1j
        np.testing.assert_array_equal(params.vector, [1, 2j])

    def test_darboux_parameters_reject_real_nu(self):
        with pytest.raises(ValidationError):
            DarbouxParameters(nu=1.0, a=5, chi0=[1, 0])

    def test_critical_mutation(self):
        params = MutationParams.critical()
        assert params.omega0 == pytest.approx(0.0, abs=1e-15)
        assert params.h == pytest.approx(2.3819660112501, rel=1e-12)
        assert params.gamma == pytest.approx(2 * H0 / (15 + math.sqrt(5)))

    def test_worked_example(self, worked_example):
        assert worked_example.s == pytest.approx(3.0)
        assert worked_example.r == pytest.approx(math.sqrt(5.0))
        assert worked_example.is_tuned
        assert worked_example.linear_scale == pytest.approx(0.0)
        assert worked_example.dim == 6

    @pytest.mark.parametrize("changes", [
        {"b": 1.0},            # a² + 4b above a²
        {"b": -6.0},           # a² + 4b below zero
        {"m": 2},              # 4m² above a² + 4b
        {"l": 2},              # l > k
        {"alphas": (1.0,)},    # wrong length
        {"a": -5.0},
    ])
    def test_multispecies_preconditions(self, worked_example, changes):
        data = {**worked_example.model_dump(), **changes}
        with pytest.raises(ValidationError):
            MultiSpeciesConfig(**data)

    def test_profile_from_betas(self):
        profile = profile_from_betas(SwitchingProfile(t0=150.0, t1=-4.0).config())
        assert profile.t0 == pytest.approx(150.0)
        assert profile.t1 == pytest.approx(-4.0)
        complex_betas = MultiSpeciesConfig.worked_example().model_copy(update={"betas": (1j, 1.0)})
        assert profile_from_betas(complex_betas) is None


class TestScenario:
    base = dict(model="organism", t_start=-1, t_end=1, t_step=0.5, outputs="trace, entropy")

    def test_parses_text_fields(self):
        scenario = Scenario(**self.base)
        assert scenario.model is ModelName.ORGANISM
        assert scenario.mode is RunMode.CLOSED_FORM
        assert scenario.outputs == ("trace", "entropy")
        assert scenario.parameters() is None

    @pytest.mark.parametrize("changes", [
        {"outputs": ""},
        {"outputs": "trace, density"},
        {"t_start": 1, "t_end": -1},
        {"t_step": 0},
        {"t_step": 5},
        {"model_params": {"h": 1}},
        {"model": "unknown"},
    ])
    def test_rejects_invalid(self, changes):
        with pytest.raises(ValidationError):
            Scenario(**{**self.base, **changes})

    def test_multispecies_parameters_merge_over_defaults(self):
        scenario = Scenario(model="multispecies", t_start=0, t_end=1, t_step=1, outputs="switching",
                            model_params={"betas": "1, 2"})
        cfg = scenario.parameters()
        assert cfg.betas == (1.0, 2.0)
        assert cfg.h == -0.25

    def test_mutation_parameters_validated(self):
        with pytest.raises(ValidationError):
            Scenario(model="mutation3", t_start=0, t_end=1, t_step=1, outputs="trace", model_params={"k": -1, "h": 1})

    def test_with_value(self):
        scenario = Scenario(model="mutation3", t_start=0, t_end=1, t_step=0.5, outputs="trace", model_params={"h": 1})
        assert scenario.with_value("h", 2.0).parameters().h == 2.0
        assert scenario.with_value("t_step", 0.25).t_step == 0.25


def test_figure_job():
    job = FigureJob(figure_id=4)
    assert job.grid == (201, 201) and job.t0 == 150.0
    assert job.ranges["t1"] == (0.0, 300.0)
    with pytest.raises(ValidationError):
        FigureJob(figure_id=7)
    with pytest.raises(ValidationError):
        FigureJob(figure_id=1, grid=(1, 10))
