"""Tests for Halpern iteration traces."""
from fractions import Fraction

import numpy as np
import pytest

from halpern_rates.errors import ContractViolationError, DomainError, ExhaustedError
from halpern_rates.models import EpsilonModulus, GFunction, LambdaRule, ModuliSchedule, ThetaRule
from halpern_rates.services import GeometryService, IterationService, MapService


@pytest.fixture
def pull_trace(start_point, sample_pull, harmonic):
    return IterationService.iterate(start_point, sample_pull, harmonic, 2000)


@pytest.fixture
def constant_half():
    return ModuliSchedule(
        LambdaRule.constant(Fraction(1, 2)),
        EpsilonModulus.constant(1),
        EpsilonModulus.constant(1),
        ThetaRule.linear(2, 0),
    )


@pytest.fixture
def shifted_harmonic():
    return ModuliSchedule(
        LambdaRule.harmonic(3),
        EpsilonModulus.reciprocal(1),
        EpsilonModulus.reciprocal(1),
        ThetaRule.linear(8, 0),
    )


class TestIterate:
    """Tests for IterationService.iterate."""

    def test_first_step_uses_lambda_one(self, pull_trace):
        """Test x_1 is the midpoint of u and T u when lambda_1 = 1/2."""
        assert pull_trace.step_distances[0] == pytest.approx(
            0.5 * pull_trace.residual_distances[0], rel=1e-12
        )

    def test_trace_shape(self, pull_trace):
        assert len(pull_trace) == 2001
        assert pull_trace.step_distances.shape == (2000,)
        assert pull_trace.residual_distances.shape == (2001,)
        assert pull_trace.vectors().shape == (2001, 3)

    def test_starts_at_anchor(self, pull_trace, start_point):
        assert np.allclose(pull_trace.point(0).direction, start_point.direction)

    def test_residual_vanishes(self, pull_trace):
        """Test d(x_n, T x_n) -> 0 for a pull."""
        assert pull_trace.residual_distances[-1] < 1e-3
        assert pull_trace.residual_distances[-1] < pull_trace.residual_distances[0]

    def test_stays_in_ball(self, pull_trace, sample_ball):
        for n in range(0, 2001, 100):
            assert sample_ball.contains(pull_trace.point(n))

    def test_fixed_distances_for_rotation(self, start_point, sample_rotation, harmonic, sample_ball):
        """Test a rotation's iterates approach the fixed center."""
        trace = IterationService.iterate(start_point, sample_rotation, harmonic, 500)
        assert trace.fixed_distances is not None
        assert trace.fixed_distances[-1] < trace.fixed_distances[0]
        d = GeometryService.distance(trace.last, sample_ball.center, sample_ball.curvature)
        assert trace.fixed_distances[-1] == pytest.approx(d)

    def test_streaming_keeps_last_points(self, start_point, sample_pull, harmonic, pull_trace):
        """Test streaming mode agrees with memory mode on the last point."""
        trace = IterationService.iterate(start_point, sample_pull, harmonic, 2000, streaming=True)
        assert trace.streaming
        assert np.allclose(trace.last.direction, pull_trace.last.direction)
        assert trace.point(1999) is not None
        with pytest.raises(ContractViolationError):
            trace.point(0)
        with pytest.raises(ContractViolationError):
            trace.vectors()

    def test_streaming_past_trace_cap(self, runtime, start_point, sample_pull, harmonic):
        runtime.config["TRACE_CAP"] = 10
        trace = IterationService.iterate(start_point, sample_pull, harmonic, 20)
        assert trace.streaming

    def test_rejects_negative_length(self, start_point, sample_pull, harmonic):
        with pytest.raises(DomainError):
            IterationService.iterate(start_point, sample_pull, harmonic, -1)

    def test_rejects_start_outside_ball(self, sample_ball, sample_pull, harmonic):
        outside = MapService.offset_point(sample_ball, [0.2])
        with pytest.raises(DomainError):
            IterationService.iterate(outside, sample_pull, harmonic, 10)

    def test_rows(self, pull_trace):
        rows = list(pull_trace.rows())
        assert len(rows) == 2001
        assert rows[0][0] == 0
        assert float(rows[0][1]) == 0.5
        assert rows[-1][2] == ""


class TestRecurrences:
    """Tests for the recurrence checks on a trace."""

    def test_step_recurrence(self, pull_trace, harmonic, unit_sphere):
        """Test d(x_n, x_{n+1}) obeys the mu-recurrence."""
        worst = IterationService.check_recurrence(pull_trace, harmonic, 0.1, unit_sphere)
        assert worst <= 1e-9

    @pytest.mark.parametrize("map_fixture", ["sample_pull", "sample_rotation"])
    @pytest.mark.parametrize("schedule_fixture", ["harmonic", "constant_half", "shifted_harmonic"])
    def test_recurrence_across_maps_and_schedules(
        self, request, start_point, unit_sphere, map_fixture, schedule_fixture
    ):
        """Test the mu-recurrence on 1000-step traces for each catalog map and schedule."""
        nonexpansive_map = request.getfixturevalue(map_fixture)
        schedule = request.getfixturevalue(schedule_fixture)
        trace = IterationService.iterate(start_point, nonexpansive_map, schedule, 1000)
        assert trace.length == 1000
        assert IterationService.check_recurrence(trace, schedule, 0.1, unit_sphere) <= 1e-9

    def test_residual_bound(self, pull_trace, harmonic):
        """Test d(x_n, T x_n) <= d(x_n, x_{n+1}) + M lambda_{n+1}."""
        assert IterationService.check_residual_bound(pull_trace, harmonic, 0.1) <= 1e-9

    def test_short_trace(self, start_point, sample_pull, harmonic, unit_sphere):
        trace = IterationService.iterate(start_point, sample_pull, harmonic, 1)
        with pytest.raises(ContractViolationError):
            IterationService.check_recurrence(trace, harmonic, 0.1, unit_sphere)

    def test_regularity_indices_map_mismatch(self, pull_trace, sample_rotation):
        with pytest.raises(ContractViolationError):
            IterationService.regularity_indices(pull_trace, sample_rotation)


class TestIndices:
    """Tests for the empirical indices."""

    def test_first_stable_index(self):
        assert IterationService.first_stable_index([0.5, 0.2, 0.3, 0.1], 0.25) == 3
        assert IterationService.first_stable_index([0.1, 0.1], 0.25) == 0
        assert IterationService.first_stable_index([0.1, 0.5], 0.25) is None

    def test_first_stable_index_positive_eps(self):
        with pytest.raises(DomainError):
            IterationService.first_stable_index([0.1], 0)

    def test_metastability_trivial_g(self, pull_trace):
        """Test g = 0 gives single-point windows."""
        assert IterationService.empirical_metastability(pull_trace, 1e-6, GFunction.constant(0)) == 0

    def test_metastability_large_eps(self, pull_trace):
        """Test eps above the ball diameter passes at once."""
        assert IterationService.empirical_metastability(pull_trace, 0.5, GFunction.constant(5)) == 0

    def test_metastability_matches_steps(self, pull_trace):
        """Test two-point windows reduce to the step distances."""
        eps = 1e-4
        found = IterationService.empirical_metastability(pull_trace, eps, GFunction.constant(1))
        expected = int(np.argmax(pull_trace.step_distances <= eps))
        assert found == expected
        assert found > 0

    def test_metastability_exhausted(self, pull_trace):
        with pytest.raises(ExhaustedError):
            IterationService.empirical_metastability(pull_trace, 1e-12, GFunction.constant(5000))
