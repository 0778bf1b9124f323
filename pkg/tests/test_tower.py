"""Tests for the metastability tower."""
import math
from fractions import Fraction

import pytest

from halpern_rates.errors import DomainError
from halpern_rates.models import EpsilonModulus, GFunction, ThetaRule
from halpern_rates.services import TowerService
from halpern_rates.services.tower_service import TowerEvaluator

TOY_CONFIGS = [
    (1.9, 0.001, GFunction.constant(1), 173),
    (1.5, 0.001, GFunction.affine(1, 1), 269),
    (1.0, 0.0005, GFunction.constant(0), 589),
]

THETA_TABLE = [3, 1, 4, 1, 5, 9, 2, 6]


def ceil_reciprocal(e):
    return math.ceil(1 / e)


def table_theta(n):
    return THETA_TABLE[n - 1] if n <= len(THETA_TABLE) else 7


def assert_matches_reference(report, ref):
    values = report.values
    assert values["c0"] == ref["c0"]
    assert values["B"] == ref["B"]
    assert values["S"] == ref["S"]
    assert values["χ*"] == ref["χ*"]
    assert values["Θ"] == ref["Θ"]
    assert values["f"] == ref["f"]
    assert report.sigma == ref["Σ"]
    assert report.k0_range[1] == ref["orbit_end"] + ref["c0"]


class TestToyTowers:
    """Tests comparing the tower with the plain-integer reference."""

    @pytest.mark.parametrize("eps,M,g,c0", TOY_CONFIGS)
    def test_matches_reference(self, eps, M, g, c0):
        report = TowerService.table1_tower(
            eps,
            g,
            1,
            M,
            ThetaRule.linear(2, 1),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
        )
        ref = TowerService.reference_tower(
            eps, g, 1, M, lambda n: 2 * n + 1, ceil_reciprocal, ceil_reciprocal
        )
        assert ref["c0"] == c0
        assert ref["B"] == 1
        assert_matches_reference(report, ref)
        assert not report.is_estimate
        assert not report.flags["height_extrapolated"]

    def test_quarter_angle_S_reported(self):
        """Test S and its sin^2(M sqrt(kappa)/4) variant both appear in the report."""
        report = TowerService.table1_tower(
            1.9,
            GFunction.constant(1),
            1,
            0.001,
            ThetaRule.linear(2, 1),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
        )
        E = math.sin(1.9 / 4) ** 2
        assert report.values["S"] == math.ceil(math.log(3 * math.sin(0.001 / 2) ** 2 / E))
        assert report.values["S_quarter"] == math.ceil(math.log(3 * math.sin(0.001 / 4) ** 2 / E))
        assert report.values["S_quarter"] < report.values["S"]
        assert report.flags["S_quarter_differs"]
        data = report.to_dict()
        assert data["values"]["S_quarter"] == -13
        assert data["flags"]["S_quarter_differs"] is True

    def test_non_monotone_theta(self):
        """Test Gamma and theta+ enumerate for a non-monotone theta."""
        g = GFunction.constant(1)
        report = TowerService.table1_tower(
            1.9,
            g,
            1,
            0.001,
            ThetaRule.table(THETA_TABLE, default=7),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
        )
        ref = TowerService.reference_tower(1.9, g, 1, 0.001, table_theta, ceil_reciprocal, ceil_reciprocal)
        assert_matches_reference(report, ref)
        assert not report.flags["gamma_bound"]

    def test_sigma_bounds_orbit(self):
        """Test the metastability bound dominates the orbit end."""
        report = TowerService.table1_tower(
            1.5,
            GFunction.affine(1, 1),
            1,
            0.001,
            ThetaRule.linear(2, 1),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
        )
        assert report.sigma > report.k0_range[1]
        assert report.k0_range[0] == report.values["c0"]


class TestHarmonicTower:
    """Tests for the closed-form tower of lambda_n = 1/(n+1)."""

    @pytest.fixture
    def harmonic_report(self):
        return TowerService.sigma_harmonic(1, GFunction.constant(1), 1, Fraction(1, 10), digit_budget=50)

    def test_constants(self, harmonic_report):
        values = harmonic_report.values
        assert values["ε₀"] == pytest.approx(1.692e-3, rel=1e-3)
        assert values["c0"] == 592
        assert 7000 < values["B"] < 7020

    def test_estimate_flagged(self, harmonic_report):
        """Test a bound beyond the digit budget is a flagged estimate."""
        assert harmonic_report.is_estimate
        assert harmonic_report.flags["estimate"]
        data = harmonic_report.to_dict()
        assert data["estimate"] is True
        assert data["Σ"]["estimate"] is True

    def test_orbit_truncated_for_report(self, harmonic_report, runtime):
        assert len(harmonic_report.orbit) <= runtime.config["REPORT_ORBIT_LIMIT"]

    def test_agrees_with_generic_tower(self, harmonic_report):
        """Test the closed forms reproduce the generic tower for the harmonic moduli."""
        generic = TowerService.table1_tower(
            1,
            GFunction.constant(1),
            1,
            Fraction(1, 10),
            ThetaRule.power(4, 1, digit_budget=50),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
            digit_budget=50,
        )
        assert generic.sigma == harmonic_report.sigma
        for key in ("c0", "B", "S", "χ*", "Θ", "f", "Γ", "A"):
            assert generic.values[key] == harmonic_report.values[key], key

    def test_extrapolated_orbit(self, runtime):
        """Test orbits longer than the iteration budget are extrapolated."""
        runtime.config["TOWER_ITERATION_BUDGET"] = 50
        report = TowerService.sigma_harmonic(1, GFunction.constant(1), 1, Fraction(1, 10), digit_budget=50)
        assert report.flags["height_extrapolated"]
        assert report.is_estimate


class TestEvaluator:
    """Tests for individual tower functionals."""

    def test_eps_range(self):
        with pytest.raises(DomainError):
            TowerEvaluator(2, GFunction.constant(1), 1, 0.1, ThetaRule.identity(),
                           EpsilonModulus.reciprocal(1), EpsilonModulus.reciprocal(1))

    def test_gamma_domain(self):
        ev = TowerEvaluator(1, GFunction.constant(1), 1, 0.001, ThetaRule.linear(2, 1),
                            EpsilonModulus.reciprocal(1), EpsilonModulus.reciprocal(1))
        with pytest.raises(DomainError):
            ev.Gamma(ev.c0 - 1)

    def test_chi_star_grows_with_index(self):
        ev = TowerEvaluator(1, GFunction.constant(1), 1, 0.001, ThetaRule.linear(2, 1),
                            EpsilonModulus.reciprocal(1), EpsilonModulus.reciprocal(1))
        assert ev.chi_star(ev.c0 + 50, ev.E / 3) >= ev.chi_star(ev.c0, ev.E / 3)

