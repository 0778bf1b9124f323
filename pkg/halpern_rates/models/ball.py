"""Geodesic ball model."""
import math

from halpern_rates.errors import ContractViolationError, DomainError

CONTAINMENT_TOLERANCE = 1e-12


class ConvexBall:
    """Closed geodesic ball serving as the convex domain C.

    The radius is kept below D_kappa/4, so the diameter bound M = 2 radius
    stays below D_kappa/2 and the ball is geodesically convex.
    """

    __slots__ = ("center", "radius", "curvature")

    def __init__(self, center, radius, curvature):
        radius = float(radius)
        if center.direction.size != curvature.ambient_dim:
            raise ContractViolationError(
                f"Center has {center.direction.size} coordinates, "
                f"curvature expects {curvature.ambient_dim}"
            )
        if not math.isfinite(radius) or radius <= 0:
            raise DomainError(f"Ball radius must be positive, got {radius}")
        if radius >= curvature.d_kappa / 4:
            raise DomainError(
                f"Ball radius {radius} must stay below D_kappa/4 = {curvature.d_kappa / 4}"
            )
        self.center = center
        self.radius = radius
        self.curvature = curvature

    @property
    def diameter_bound(self):
        """M = 2 radius."""
        return 2.0 * self.radius

    M = diameter_bound

    @property
    def scaled_diameter(self):
        """M sqrt(kappa), the angle every rate formula works with."""
        return self.diameter_bound * self.curvature.sqrt_kappa

    def contains(self, point, tol=CONTAINMENT_TOLERANCE):
        from halpern_rates.services.map_service import MapService

        return MapService.contains(self, point, tol)

    def __repr__(self):
        return f"<ConvexBall radius={self.radius} kappa={self.curvature.kappa}>"

    def to_dict(self):
        return {
            "center": self.center.to_list(),
            "radius": self.radius,
            "M": self.diameter_bound,
            "curvature": self.curvature.to_dict(),
        }
