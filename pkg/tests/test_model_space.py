"""Tests for model-space geometry."""
import math

import numpy as np
import pytest

from halpern_rates.errors import (
    ContractViolationError,
    DegenerateTriangleError,
    DomainError,
    InfeasibleTriangleError,
    InvalidPointError,
)
from halpern_rates.models import Curvature, GeodesicConfig, ModelPoint
from halpern_rates.services import GeometryService


def on_circle(angle, kappa=1.0):
    """Point at distance ``angle``/sqrt(kappa) from the pole along e1."""
    return ModelPoint((math.sin(angle), 0.0, math.cos(angle)))


class TestCurvature:
    """Tests for the Curvature value type."""

    def test_diameter(self):
        """Test D_kappa = pi/sqrt(kappa)."""
        c = Curvature(4.0)
        assert c.sqrt_kappa == 2.0
        assert c.d_kappa == pytest.approx(math.pi / 2)
        assert c.ambient_dim == 3

    @pytest.mark.parametrize("kappa", [0.0, -1.0, float("inf")])
    def test_rejects_nonpositive(self, kappa):
        """Test curvature must be positive and finite."""
        with pytest.raises(DomainError):
            Curvature(kappa)

    def test_rejects_low_dimension(self):
        """Test the sphere dimension is at least 2."""
        with pytest.raises(DomainError):
            Curvature(1.0, dim=1)


class TestModelPoint:
    """Tests for ModelPoint."""

    def test_requires_unit_norm(self):
        """Test non-unit directions are rejected."""
        with pytest.raises(InvalidPointError):
            ModelPoint((0.0, 0.0, 2.0))

    def test_from_vector_normalizes(self):
        """Test from_vector projects onto the sphere."""
        p = ModelPoint.from_vector((3.0, 0.0, 4.0))
        assert np.linalg.norm(p.direction) == pytest.approx(1.0)
        assert p.to_list() == pytest.approx([0.6, 0.0, 0.8])

    def test_zero_vector(self):
        """Test the zero vector cannot be normalized."""
        with pytest.raises(InvalidPointError):
            ModelPoint.from_vector((0.0, 0.0, 0.0))

    def test_too_few_coordinates(self):
        """Test points need an ambient dimension of at least 3."""
        with pytest.raises(ContractViolationError):
            ModelPoint((1.0, 0.0))

    def test_immutable_direction(self):
        """Test directions are read-only."""
        p = ModelPoint((0.0, 0.0, 1.0))
        with pytest.raises(ValueError):
            p.direction[0] = 1.0


class TestDistance:
    """Tests for geodesic distance."""

    def test_scaled_by_curvature(self):
        """Test distances scale by 1/sqrt(kappa)."""
        p, q = on_circle(0.0), on_circle(0.6)
        assert GeometryService.distance(p, q, Curvature(1.0)) == pytest.approx(0.6)
        assert GeometryService.distance(p, q, Curvature(4.0)) == pytest.approx(0.3)

    def test_antipodes(self):
        """Test antipodal points sit at D_kappa."""
        p = ModelPoint((0.0, 0.0, 1.0))
        c = Curvature(1.0)
        assert GeometryService.distance(p, p.antipode(), c) == pytest.approx(math.pi)

    def test_small_angles_accurate(self):
        """Test tiny distances keep their relative precision."""
        c = Curvature(1.0)
        d = GeometryService.distance(on_circle(0.0), on_circle(1e-9), c)
        assert d == pytest.approx(1e-9, rel=1e-6)

    def test_dimension_mismatch(self):
        """Test points must match the curvature's ambient dimension."""
        p = ModelPoint((0.0, 0.0, 0.0, 1.0))
        with pytest.raises(ContractViolationError):
            GeometryService.distance(p, p, Curvature(1.0))


class TestGeodesics:
    """Tests for geodesic points."""

    def test_parameter_measured_from_start(self):
        """Test d(p, w) = t d(p, q)."""
        c = Curvature(1.0)
        p, q = on_circle(0.1), on_circle(0.9)
        w = GeometryService.geodesic_point(p, q, 0.25, c)
        assert GeometryService.distance(p, w, c) == pytest.approx(0.2)
        assert GeometryService.distance(w, q, c) == pytest.approx(0.6)

    def test_endpoints(self):
        """Test t = 0 and t = 1 return the endpoints."""
        c = Curvature(1.0)
        p, q = on_circle(0.1), on_circle(0.9)
        assert GeometryService.geodesic_point(p, q, 0.0, c) is p
        assert GeometryService.geodesic_point(p, q, 1.0, c) is q

    def test_antipodal_not_unique(self):
        """Test antipodal endpoints have no unique geodesic."""
        c = Curvature(1.0)
        p = on_circle(0.0)
        with pytest.raises(DomainError):
            GeometryService.geodesic_point(p, p.antipode(), 0.5, c)

    def test_parameter_range(self):
        """Test t must lie in [0, 1]."""
        c = Curvature(1.0)
        with pytest.raises(DomainError):
            GeometryService.geodesic_point(on_circle(0.0), on_circle(0.5), 1.5, c)

    def test_geodesic_config(self):
        """Test GeodesicConfig stores the length and interpolates."""
        c = Curvature(1.0)
        g = GeodesicConfig(on_circle(0.0), on_circle(1.0), c)
        assert g.length == pytest.approx(1.0)
        assert GeometryService.distance(g.x, g.point(0.5), c) == pytest.approx(0.5)


class TestComparisonTriangle:
    """Tests for comparison triangles and vertex angles."""

    def test_side_lengths_reproduced(self):
        """Test the placed triangle has the requested sides."""
        c = Curvature(2.0)
        tri = GeometryService.comparison_triangle(0.4, 0.5, 0.3, c)
        assert tri.side_lengths() == pytest.approx((0.4, 0.5, 0.3))

    def test_right_angle_on_octant(self):
        """Test the octant triangle has right angles."""
        c = Curvature(1.0)
        x = ModelPoint((0.0, 0.0, 1.0))
        y = ModelPoint((1.0, 0.0, 0.0))
        z = ModelPoint((0.0, 1.0, 0.0))
        assert GeometryService.vertex_angle(x, y, z, c) == pytest.approx(math.pi / 2)

    def test_infeasible_sides(self):
        """Test the triangle inequality is enforced."""
        with pytest.raises(InfeasibleTriangleError):
            GeometryService.comparison_triangle(0.1, 0.5, 0.1, Curvature(1.0))

    def test_degenerate_vertex(self):
        """Test a vertex angle needs distinct neighbours."""
        c = Curvature(1.0)
        x = on_circle(0.0)
        with pytest.raises(DegenerateTriangleError):
            GeometryService.vertex_angle(x, x, on_circle(0.3), c)

    def test_cat_residual_vanishes_on_model_space(self):
        """Test the comparison inequality is an equality on the sphere itself."""
        c = Curvature(1.0)
        x = on_circle(0.0)
        y = on_circle(0.5)
        z = ModelPoint((0.0, math.sin(0.4), math.cos(0.4)))
        residual = GeometryService.cat_inequality_residual(x, y, z, 0.3, 0.7, c)
        assert abs(residual) < 1e-10

    def test_side_from_angle(self):
        """Test the spherical law of cosines inverts vertex_angle."""
        c = Curvature(1.0)
        x = ModelPoint((0.0, 0.0, 1.0))
        y = ModelPoint((1.0, 0.0, 0.0))
        z = ModelPoint((0.0, 1.0, 0.0))
        side = GeometryService.side_from_angle(math.pi / 2, math.pi / 2, math.pi / 2, c)
        assert side == pytest.approx(GeometryService.distance(y, z, c))
        assert GeometryService.distance(x, y, c) == pytest.approx(math.pi / 2)
