"""Tests for the inequality oracles."""
import math
from fractions import Fraction

import numpy as np
import pytest

from halpern_rates.errors import ContractViolationError, DomainError, ExhaustedError
from halpern_rates.models import (
    EpsilonModulus,
    GFunction,
    LambdaRule,
    ModelPoint,
    ModuliSchedule,
    ThetaRule,
    TriangleConfig,
)
from halpern_rates.services import (
    BrowderService,
    GeometryService,
    IterationService,
    OracleService,
    RateService,
)
from halpern_rates.services.oracle_service import S_RESIDUALS, TRIG_TOLERANCE

POLE = ModelPoint((0.0, 0.0, 1.0))


def along(axis, angle):
    vector = [0.0, 0.0, math.cos(angle)]
    vector[axis] = math.sin(angle)
    return ModelPoint(vector)


def hav(a):
    return math.sin(a / 2) ** 2


@pytest.fixture
def corner(unit_sphere):
    """x at the pole, y and z at 0.6 along orthogonal directions."""
    return POLE, along(0, 0.6), along(1, 0.6)


class TestTriangleConfig:
    """Tests for the parameter convention of w and v."""

    def test_parameters_measured_from_far_end(self, corner, unit_sphere):
        """Test d(x, w) = (1 - r) d(x, y)."""
        x, y, z = corner
        cfg = TriangleConfig(x, y, z, 0.25, 0.75, unit_sphere, 0.9)
        assert cfg.d("x", "w") == pytest.approx(0.75 * 0.6)
        assert cfg.d("x", "v") == pytest.approx(0.25 * 0.6)

    def test_diameter_bound(self, corner, unit_sphere):
        x, y, z = corner
        with pytest.raises(DomainError):
            TriangleConfig(x, y, z, 0.5, 0.5, unit_sphere, 0.5)

    def test_distinct_vertices(self, unit_sphere):
        with pytest.raises(DomainError):
            TriangleConfig(POLE, POLE, along(1, 0.3), 0.5, 0.5, unit_sphere, 0.9)


class TestComparisonInequalities:
    """Tests for the S/C relations and the split bounds."""

    def test_sc_quantities(self, corner, unit_sphere):
        """Test S2 = sin^2 of the legs for the orthogonal corner."""
        x, y, z = corner
        q = OracleService.compute_sc(TriangleConfig(x, y, z, 0.5, 0.5, unit_sphere, 0.9))
        assert q.S2 == pytest.approx(math.sin(0.6) ** 2)
        assert q.S3 == pytest.approx(math.sin(0.3) * math.sin(0.6))
        assert q.L1 == pytest.approx(math.sin(0.3) / math.sin(0.6))
        assert OracleService.compute_sc(TriangleConfig(x, y, z, 0.5, 1.0, unit_sphere, 0.9)).L1 is None

    def test_s_inequalities(self, corner, unit_sphere):
        x, y, z = corner
        residuals = OracleService.check_s_inequalities(TriangleConfig(x, y, z, 0.3, 0.6, unit_sphere, 0.9))
        assert len(residuals) == len(S_RESIDUALS)
        assert abs(residuals[2]) <= TRIG_TOLERANCE
        assert (residuals <= TRIG_TOLERANCE).all()

    @pytest.mark.parametrize("r,s", [(0.05, 0.05), (0.3, 0.6), (0.9, 0.2), (0.5, 0.99)])
    def test_comparison_props(self, corner, unit_sphere, r, s):
        x, y, z = corner
        residuals = OracleService.check_comparison_props(TriangleConfig(x, y, z, r, s, unit_sphere, 0.9))
        for name, value in residuals.items():
            assert value <= TRIG_TOLERANCE, name

    def test_split_bound_convention(self, corner, unit_sphere):
        """Test the split bound uses w = r x + (1 - r) y and fails with r swapped."""
        x, y, z = corner
        cfg = TriangleConfig(x, y, z, 0.05, 0.05, unit_sphere, 0.9)
        lhs = hav(cfg.scaled("w", "v"))
        assert lhs == pytest.approx(0.148, abs=5e-3)
        assert OracleService.split_bound(cfg) >= lhs
        assert lhs - OracleService.split_bound(cfg, r=0.95) > 0.1

    def test_split_bound_other_side(self, corner, unit_sphere):
        x, y, z = corner
        cfg = TriangleConfig(x, y, z, 0.95, 0.05, unit_sphere, 0.9)
        assert OracleService.split_bound(cfg) >= hav(cfg.scaled("w", "v"))

    def test_lemma_e(self, corner, unit_sphere):
        x, y, z = corner
        out = OracleService.check_lemma_E(TriangleConfig(x, y, z, 0.4, 0.3, unit_sphere, 0.9))
        assert out["positivity"] < 0
        assert out["upper"] <= TRIG_TOLERANCE
        assert out["ratio"] <= TRIG_TOLERANCE

    def test_lemma_e_interior(self, corner, unit_sphere):
        x, y, z = corner
        with pytest.raises(DomainError):
            OracleService.check_lemma_E(TriangleConfig(x, y, z, 0.4, 1.0, unit_sphere, 0.9))

    def test_prop47(self, unit_sphere):
        x, y, z = POLE, along(0, 0.3), along(1, 0.6)
        cfg = TriangleConfig(x, y, z, 0.5, 0.05, unit_sphere, 0.9)
        out = OracleService.check_prop47(cfg, z)
        assert out["i"] <= TRIG_TOLERANCE
        assert out["ii"] is not None
        assert out["ii"] <= TRIG_TOLERANCE

    def test_prop47_hypothesis(self, corner, unit_sphere):
        """Test item (ii) is skipped when d(x, y) > d(x, v)."""
        x, y, z = corner
        cfg = TriangleConfig(x, y, z, 0.5, 0.9, unit_sphere, 0.9)
        assert OracleService.check_prop47(cfg, z)["ii"] is None

    def test_prop47_parameter_mismatch(self, corner, unit_sphere):
        x, y, z = corner
        cfg = TriangleConfig(x, y, z, 0.5, 0.5, unit_sphere, 0.9)
        with pytest.raises(ContractViolationError):
            OracleService.check_prop47(cfg, z, s=0.25)


class TestLemmas:
    """Tests for the contraction, segment and sine lemmas."""

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_contraction(self, corner, unit_sphere, t):
        x, y, z = corner
        assert OracleService.check_lemma_contraction(x, y, z, t, unit_sphere) <= 1e-12

    def test_contraction_t_range(self, corner, unit_sphere):
        x, y, z = corner
        with pytest.raises(DomainError):
            OracleService.check_lemma_contraction(x, y, z, 1.0, unit_sphere)

    def test_meta1(self, unit_sphere):
        """Test the conclusions when the angle at w towards z is acute."""
        x, z = POLE, along(0, 0.6)
        p = along(0, 0.45).direction
        y = ModelPoint.from_vector(math.cos(0.1) * p + math.sin(0.1) * np.array([0.0, 1.0, 0.0]))
        w = GeometryService.geodesic_point(x, z, 0.5, unit_sphere)
        out = OracleService.check_lemma_meta1(x, y, z, w, unit_sphere)
        assert out is not None
        assert out["distance"] <= TRIG_TOLERANCE
        assert out["angle"] <= 1e-6

    def test_meta1_w_at_z(self, corner, unit_sphere):
        x, y, z = corner
        assert OracleService.check_lemma_meta1(x, y, z, z, unit_sphere) is None

    def test_meta1_off_segment(self, corner, unit_sphere):
        x, y, z = corner
        with pytest.raises(DomainError):
            OracleService.check_lemma_meta1(x, y, z, y, unit_sphere)

    def test_sin_sum_values(self):
        assert OracleService.check_sin_sum(math.pi / 2, math.pi / 2) == pytest.approx(-0.5)
        assert OracleService.check_sin_sum(0.0, 0.0) == 0.0

    def test_sin_sum_grid(self):
        grid = np.linspace(0.0, math.pi, 25)
        worst = max(OracleService.check_sin_sum(a, b) for a in grid for b in grid)
        assert worst <= 1e-12

    def test_sin_sum_range(self):
        with pytest.raises(DomainError):
            OracleService.check_sin_sum(4.0, 0.0)


class TestHalpernBounds:
    """Tests for the gamma_n^t bounds along a trace."""

    @pytest.fixture
    def trace(self, start_point, sample_pull, harmonic):
        return IterationService.iterate(start_point, sample_pull, harmonic, 40)

    @pytest.fixture
    def browder(self, start_point, sample_pull):
        return BrowderService.solve_fixed_point(start_point, 0.5, sample_pull, tol=1e-13)

    def test_prop71(self, trace, browder, harmonic, unit_sphere):
        report = OracleService.check_prop71(trace, browder, harmonic, 0.1, unit_sphere)
        assert report.checked == 39
        assert report.passed

    def test_gamma_nt_at_fixed_point(self, start_point, browder, unit_sphere):
        assert OracleService.gamma_nt(start_point, browder.z, browder.z, unit_sphere) == 0.0

    def test_gamma_limsup(self, trace, start_point, sample_pull, harmonic, unit_sphere):
        family = BrowderService.resolvent_family(start_point, sample_pull, 2, tol=1e-13)
        out = OracleService.check_gamma_limsup(trace, family[1], harmonic, Fraction(1, 10), unit_sphere, 1)
        assert out["holds"]

    def test_lemma73(self, start_point, sample_pull, unit_sphere):
        family = BrowderService.resolvent_family(start_point, sample_pull, 8, tol=1e-13)
        value = OracleService.check_lemma73(family, 2, 5, 0.5, start_point, sample_pull, unit_sphere, 0.1)
        assert value is not None
        assert value <= 1e-9
        same = OracleService.check_lemma73(family, 3, 3, 0.5, start_point, sample_pull, unit_sphere, 0.1)
        assert same < 0


class TestSequenceLemmas:
    """Tests for the quantitative sequence lemmas."""

    def test_sequence_lemma(self, harmonic):
        n = np.arange(1, 301)
        a = 1.0 / n
        out = OracleService.check_sequence_lemma(
            a, harmonic.values(1, 301), np.zeros(300), 1, 1, harmonic.gamma_modulus, harmonic.theta_rule
        )
        assert out["sigma"] == 257
        assert out["checked"] == 44
        assert out["holds"]

    def test_sequence_lemma_recurrence(self, harmonic):
        with pytest.raises(ContractViolationError):
            OracleService.check_sequence_lemma(
                [0.1, 0.9], [0.5, 0.5], [0.0], 1, 1, harmonic.gamma_modulus, harmonic.theta_rule
            )

    def test_sequence_lemma_bound(self, harmonic):
        with pytest.raises(ContractViolationError):
            OracleService.check_sequence_lemma(
                [2.0], [0.5], [], 1, 1, harmonic.gamma_modulus, harmonic.theta_rule
            )

    @pytest.fixture
    def geometric(self):
        """s_n = 2^-n with alpha_n = 1/2 and t_n = 0."""
        s = 0.5 ** np.arange(1, 21)
        return s, np.full(19, 0.5), np.zeros(19)

    def test_aoyama_window(self, geometric):
        s, alpha, t = geometric
        g = GFunction.constant(3)
        Theta, Delta = RateService.aoyama_theta_delta(
            Fraction(1, 10), Fraction(1, 2), ThetaRule.linear(2, 0), EpsilonModulus.constant(1), g
        )
        assert Theta == 7
        assert Delta == Fraction(1, 270)
        report = OracleService.check_aoyama(s, alpha, t, Delta, Theta, g, Fraction(1, 10))
        assert report.window == [7, 10]
        assert report.holds
        assert report.recurrence_residual <= 0

    def test_aoyama_window_fails(self):
        s = np.full(10, 0.5)
        report = OracleService.check_aoyama(s, np.zeros(9), np.zeros(9), 0, 2, GFunction.constant(1), 0.1)
        assert not report.holds

    def test_aoyama_recurrence(self):
        with pytest.raises(ContractViolationError):
            OracleService.check_aoyama([0.1, 0.5], [0.5], [0.0], 0, 1, GFunction.constant(0), 0.1)

    def test_aoyama_exhausted(self, geometric):
        s, alpha, t = geometric
        with pytest.raises(ExhaustedError):
            OracleService.check_aoyama(s, alpha, t, 0, 25, GFunction.constant(0), 0.1)

    def test_halpern_instance(self, start_point, sample_pull, unit_sphere):
        """Test the sequences of a Halpern run with lambda = 1/2 fit the recurrence."""
        schedule = ModuliSchedule(
            LambdaRule.constant(Fraction(1, 2)),
            EpsilonModulus.constant(1),
            EpsilonModulus.constant(1),
            ThetaRule.linear(2, 0),
        )
        trace = IterationService.iterate(start_point, sample_pull, schedule, 40)
        browder = BrowderService.solve_fixed_point(start_point, 0.5, sample_pull, tol=1e-13)
        report = OracleService.halpern_aoyama_instance(
            trace, browder, schedule, 0.1, unit_sphere, Fraction(1, 2), GFunction.constant(0)
        )
        assert report.theta == 5
        assert report.delta == Fraction(1, 24)
        assert report.holds
