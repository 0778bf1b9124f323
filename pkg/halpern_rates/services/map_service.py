"""Map service - balls, catalog maps and nonexpansiveness checks."""
import logging
import math

import numpy as np

from halpern_rates.errors import ConfigurationError, DomainError, UnsupportedAnalysisError
from halpern_rates.models.ball import CONTAINMENT_TOLERANCE, ConvexBall
from halpern_rates.models.curvature import ModelPoint
from halpern_rates.models.maps import Composition, GeodesicPull, Rotation, as_point
from halpern_rates.models.reports import NonexpansiveReport
from halpern_rates.services.geometry_service import GeometryService, angle_between, tangent_basis
from halpern_rates.utils.sampling import make_rng, random_vector_in_ball

logger = logging.getLogger(__name__)

# Pairs closer than this are too noisy for a ratio
MIN_PAIR_DISTANCE = 1e-8
FIXED_POINT_MATCH = 1e-12


class MapService:
    """Service for the convex domain and its nonexpansive maps."""

    @staticmethod
    def contains(ball, point, tol=CONTAINMENT_TOLERANCE):
        """True iff ``point`` lies in the closed ball (within tol)."""
        return GeometryService.distance(ball.center, point, ball.curvature) <= ball.radius + tol

    @staticmethod
    def apply(nonexpansive_map, point):
        """Apply a catalog map to a point of its ball.

        Args:
            nonexpansive_map: Rotation, GeodesicPull or Composition
            point: ModelPoint in the map's ball

        Returns:
            Image ModelPoint
        """
        ball = nonexpansive_map.ball
        if not MapService.contains(ball, point):
            raise DomainError(f"Point {point} lies outside the ball")
        return as_point(nonexpansive_map._apply_vector(point.direction))

    @staticmethod
    def contraction_factor(nonexpansive_map):
        """Certified Lipschitz bound of a catalog map on its ball."""
        if isinstance(nonexpansive_map, Rotation):
            return 1.0
        if isinstance(nonexpansive_map, GeodesicPull):
            k = nonexpansive_map.ball.scaled_diameter
            return math.sin((1.0 - nonexpansive_map.factor) * k) / math.sin(k)
        if isinstance(nonexpansive_map, Composition):
            factor = 1.0
            for m in nonexpansive_map.maps:
                factor *= MapService.contraction_factor(m)
            return factor
        raise UnsupportedAnalysisError(f"No contraction factor for {nonexpansive_map!r}")

    @staticmethod
    def fixed_point_of(nonexpansive_map, ball=None):
        """Known fixed point of a catalog map.

        Rotations fix the center and pulls fix their anchor. A composition
        is supported when all factors share one fixed point.
        """
        if isinstance(nonexpansive_map, Rotation):
            return nonexpansive_map.ball.center
        if isinstance(nonexpansive_map, GeodesicPull):
            return nonexpansive_map.anchor
        if isinstance(nonexpansive_map, Composition):
            points = [MapService.fixed_point_of(m) for m in nonexpansive_map.maps]
            first = points[0]
            for p in points[1:]:
                if angle_between(first.direction, p.direction) > FIXED_POINT_MATCH:
                    raise UnsupportedAnalysisError(
                        "Composition factors do not share a fixed point"
                    )
            return first
        raise UnsupportedAnalysisError(f"No known fixed point for {nonexpansive_map!r}")

    @staticmethod
    def sample_point(ball, rng):
        """Random point of the ball (area-weighted radius, uniform direction)."""
        vector = random_vector_in_ball(
            ball.center.direction,
            ball.radius,
            ball.curvature.sqrt_kappa,
            ball.curvature.dim,
            make_rng(rng),
        )
        return ModelPoint.from_vector(vector)

    @staticmethod
    def sample_pairs(ball, count, seed):
        """``count`` seeded pairs of random points in the ball."""
        rng = make_rng(seed)
        return [(MapService.sample_point(ball, rng), MapService.sample_point(ball, rng)) for _ in range(count)]

    @staticmethod
    def verify_nonexpansive(nonexpansive_map, ball, samples, tol=1e-9, seed=0):
        """Measure d(Tx, Ty)/d(x, y) over random pairs of the ball.

        Returns:
            NonexpansiveReport with the largest ratio and the count of
            ratios above 1 + tol
        """
        if samples < 1:
            raise DomainError("samples must be at least 1")
        rng = make_rng(seed)
        c = ball.curvature
        args = (ball.center.direction, ball.radius, c.sqrt_kappa, c.dim)
        max_ratio = 0.0
        violations = 0
        for _ in range(samples):
            x = random_vector_in_ball(*args, rng)
            y = random_vector_in_ball(*args, rng)
            dxy = angle_between(x, y)
            if dxy / c.sqrt_kappa <= MIN_PAIR_DISTANCE:
                continue
            ratio = angle_between(
                nonexpansive_map._apply_vector(x), nonexpansive_map._apply_vector(y)
            ) / dxy
            max_ratio = max(max_ratio, ratio)
            if ratio > 1.0 + tol:
                violations += 1
        if violations:
            logger.error(
                f"{nonexpansive_map!r} expanded {violations} of {samples} pairs "
                f"(max ratio {max_ratio!r})"
            )
        return NonexpansiveReport(
            max_expansion_ratio=max_ratio,
            violations=violations,
            samples=samples,
            tolerance=tol,
            seed=seed if isinstance(seed, int) else 0,
        )

    @staticmethod
    def build_ball(space, ball_spec):
        """ConvexBall from the ``space`` and ``ball`` configuration sections."""
        from halpern_rates.models.curvature import Curvature

        try:
            curvature = Curvature(space.get("kappa", 1.0), space.get("dim", 2))
            center = ball_spec.get("center")
            if center is None:
                center = [0.0] * curvature.dim + [1.0]
            return ConvexBall(ModelPoint.from_vector(center), ball_spec["radius"], curvature)
        except (KeyError, DomainError, ValueError) as exc:
            raise ConfigurationError(f"Invalid space/ball configuration: {exc}") from exc

    @staticmethod
    def offset_point(ball, offset):
        """Point reached from the center along tangent coordinates ``offset``."""
        basis = tangent_basis(ball.center.direction)
        coords = np.zeros(basis.shape[0])
        offset = list(offset)
        if len(offset) > coords.size:
            raise ConfigurationError(f"Offset {offset} has too many coordinates")
        coords[: len(offset)] = offset
        length = float(np.linalg.norm(coords))
        if length == 0.0:
            return ball.center
        return GeometryService.exp_point(
            ball.center, coords @ basis / length, length, ball.curvature
        )

    @staticmethod
    def resolve_point(ball, spec, default_offset):
        """A point given as a vector, as {'offset': [...]}, or by default."""
        if spec is None:
            return MapService.offset_point(ball, default_offset)
        if isinstance(spec, dict):
            if "offset" in spec:
                return MapService.offset_point(ball, spec["offset"])
            if "vector" in spec:
                return ModelPoint.from_vector(spec["vector"])
            raise ConfigurationError(f"Point spec {spec} needs 'offset' or 'vector'")
        return ModelPoint.from_vector(spec)

    @staticmethod
    def build_map(spec, ball):
        """Catalog map from its configuration section.

        Args:
            spec: dict with ``kind`` rotation | pull | composition
            ball: ConvexBall the map acts on

        Returns:
            NonexpansiveMap
        """
        spec = dict(spec or {"kind": "pull"})
        kind = spec.get("kind", "pull")
        try:
            if kind == "rotation":
                return Rotation(ball, spec.get("angle", 0.3), spec.get("plane"))
            if kind == "pull":
                anchor = MapService.resolve_point(
                    ball, spec.get("anchor"), [0.0, 0.8 * ball.radius]
                )
                return GeodesicPull(ball, anchor, spec.get("factor", 0.5))
            if kind == "composition":
                parts = spec.get("maps") or []
                if isinstance(parts, dict):
                    parts = [parts[key] for key in sorted(parts, key=int)]
                return Composition([MapService.build_map(part, ball) for part in parts])
        except (DomainError, ValueError) as exc:
            raise ConfigurationError(f"Invalid map configuration {spec}: {exc}") from exc
        raise ConfigurationError(f"Unknown map kind '{kind}'")
