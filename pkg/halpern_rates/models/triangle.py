"""Triangle configurations for the comparison inequalities."""
from dataclasses import asdict, dataclass
from typing import Optional

from halpern_rates.errors import DomainError

MIN_SIDE = 1e-8
ADDITIVITY_TOLERANCE = 1e-10


class TriangleConfig:
    """Pairwise distinct x, y, z with w on [x, y] and v on [x, z].

    ``w = r x + (1 - r) y`` and ``v = s x + (1 - s) z``: w sits at
    parameter 1 - r from x, so d(x, w) = (1 - r) d(x, y), and likewise
    d(x, v) = (1 - s) d(x, z).
    """

    def __init__(self, x, y, z, r, s, curvature, M):
        from halpern_rates.services.geometry_service import GeometryService

        r, s, M = float(r), float(s), float(M)
        if not (0.0 <= r <= 1.0 and 0.0 <= s <= 1.0):
            raise DomainError(f"Parameters r={r}, s={s} must lie in [0, 1]")
        if M >= curvature.d_kappa / 2:
            raise DomainError(f"Diameter bound {M} must stay below D_kappa/2")
        self.x, self.y, self.z = x, y, z
        self.r, self.s = r, s
        self.curvature = curvature
        self.M = M
        self.w = GeometryService.geodesic_point(x, y, 1.0 - r, curvature)
        self.v = GeometryService.geodesic_point(x, z, 1.0 - s, curvature)

        points = {"x": x, "y": y, "z": z, "w": self.w, "v": self.v}
        names = sorted(points)
        self._d = {}
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                self._d[a + b] = GeometryService.distance(points[a], points[b], curvature)

        if min(self.d("x", "y"), self.d("x", "z"), self.d("y", "z")) < MIN_SIDE:
            raise DomainError("Triangle vertices must be pairwise distinct")
        longest = max(self._d.values())
        if longest > M * (1 + 1e-12):
            raise DomainError(f"Distance {longest} exceeds the diameter bound {M}")
        gap_w = abs(self.d("x", "w") + self.d("w", "y") - self.d("x", "y"))
        gap_v = abs(self.d("x", "v") + self.d("v", "z") - self.d("x", "z"))
        if max(gap_w, gap_v) > ADDITIVITY_TOLERANCE:
            raise DomainError("w or v is off its segment")

    def d(self, a, b):
        """Distance between two named points (x, y, z, w, v)."""
        if a == b:
            return 0.0
        key = a + b if a < b else b + a
        return self._d[key]

    def scaled(self, a, b):
        """d(a, b) sqrt(kappa)."""
        return self.d(a, b) * self.curvature.sqrt_kappa

    @property
    def scaled_diameter(self):
        return self.M * self.curvature.sqrt_kappa

    def __repr__(self):
        return f"<TriangleConfig r={self.r:.4g} s={self.s:.4g} kappa={self.curvature.kappa}>"

    def to_dict(self):
        return {
            "x": self.x.to_list(),
            "y": self.y.to_list(),
            "z": self.z.to_list(),
            "w": self.w.to_list(),
            "v": self.v.to_list(),
            "r": self.r,
            "s": self.s,
            "kappa": self.curvature.kappa,
            "M": self.M,
        }


@dataclass(frozen=True)
class SCQuantities:
    """Sine and cosine products of a TriangleConfig.

    L1 and L2 are only defined when v differs from x and z.
    """

    S1: float
    S2: float
    S3: float
    S4: float
    S5: float
    C1: float
    C2: float
    L1: Optional[float] = None
    L2: Optional[float] = None

    def to_dict(self):
        return asdict(self)
