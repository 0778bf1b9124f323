"""Model-space value types: curvature, points, geodesic configurations."""
import math

import numpy as np

from halpern_rates.errors import ContractViolationError, DomainError, InvalidPointError

UNIT_TOLERANCE = 1e-12


class Curvature:
    """Positive curvature of the model sphere M^dim_kappa."""

    __slots__ = ("kappa", "dim")

    def __init__(self, kappa, dim=2):
        kappa = float(kappa)
        if not math.isfinite(kappa) or kappa <= 0:
            raise DomainError(f"Curvature must be positive, got {kappa}")
        if int(dim) != dim or dim < 2:
            raise DomainError(f"Sphere dimension must be an integer >= 2, got {dim}")
        self.kappa = kappa
        self.dim = int(dim)

    @property
    def sqrt_kappa(self):
        return math.sqrt(self.kappa)

    @property
    def d_kappa(self):
        """Diameter pi/sqrt(kappa) of the model space."""
        return math.pi / self.sqrt_kappa

    @property
    def ambient_dim(self):
        return self.dim + 1

    def __eq__(self, other):
        if not isinstance(other, Curvature):
            return NotImplemented
        return self.kappa == other.kappa and self.dim == other.dim

    def __hash__(self):
        return hash((self.kappa, self.dim))

    def __repr__(self):
        return f"<Curvature kappa={self.kappa} dim={self.dim}>"

    def to_dict(self):
        return {"kappa": self.kappa, "dim": self.dim}


class ModelPoint:
    """A point of the model space stored as a unit direction vector."""

    __slots__ = ("direction",)

    def __init__(self, direction):
        vector = np.array(direction, dtype=float).reshape(-1)
        if vector.size < 3:
            raise ContractViolationError(
                f"Direction needs at least 3 coordinates, got {vector.size}"
            )
        if not np.all(np.isfinite(vector)):
            raise InvalidPointError("Direction has non-finite coordinates")
        norm = float(np.linalg.norm(vector))
        if abs(norm - 1.0) > UNIT_TOLERANCE:
            raise InvalidPointError(f"Direction norm {norm!r} is not 1")
        vector.setflags(write=False)
        self.direction = vector

    @classmethod
    def from_vector(cls, vector):
        """Normalize an arbitrary nonzero vector onto the sphere."""
        vector = np.array(vector, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(vector))
        if norm == 0.0 or not math.isfinite(norm):
            raise InvalidPointError("Cannot normalize a zero vector")
        return cls(vector / norm)

    @property
    def dim(self):
        return self.direction.size - 1

    def antipode(self):
        return ModelPoint(-self.direction)

    def to_list(self):
        return [float(v) for v in self.direction]

    def __eq__(self, other):
        if not isinstance(other, ModelPoint):
            return NotImplemented
        return np.array_equal(self.direction, other.direction)

    def __hash__(self):
        return hash(self.direction.tobytes())

    def __repr__(self):
        coords = ", ".join(f"{v:.6g}" for v in self.direction)
        return f"<ModelPoint ({coords})>"


class GeodesicConfig:
    """Two points joined by a unique geodesic (distance below D_kappa)."""

    __slots__ = ("x", "y", "curvature", "length")

    def __init__(self, x, y, curvature):
        from halpern_rates.services.geometry_service import GeometryService

        length = GeometryService.distance(x, y, curvature)
        if length >= curvature.d_kappa * (1 - 1e-12):
            raise DomainError(
                f"Geodesic between {x} and {y} is not unique (length {length})"
            )
        self.x = x
        self.y = y
        self.curvature = curvature
        self.length = length

    def point(self, t):
        from halpern_rates.services.geometry_service import GeometryService

        return GeometryService.geodesic_point(self.x, self.y, t, self.curvature)

    def __repr__(self):
        return f"<GeodesicConfig length={self.length:.6g}>"


class ComparisonTriangle:
    """Canonically placed comparison triangle in M^2_kappa."""

    __slots__ = ("xbar", "ybar", "zbar", "curvature")

    def __init__(self, xbar, ybar, zbar, curvature):
        self.xbar = xbar
        self.ybar = ybar
        self.zbar = zbar
        self.curvature = curvature

    @property
    def vertices(self):
        return self.xbar, self.ybar, self.zbar

    def side_lengths(self):
        """(d(x,y), d(y,z), d(z,x)) of the placed triangle."""
        from halpern_rates.services.geometry_service import GeometryService

        d = GeometryService.distance
        c = self.curvature
        return (
            d(self.xbar, self.ybar, c),
            d(self.ybar, self.zbar, c),
            d(self.zbar, self.xbar, c),
        )

    def __repr__(self):
        return f"<ComparisonTriangle sides={self.side_lengths()}>"
