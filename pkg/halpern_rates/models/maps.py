"""Catalog of nonexpansive self-maps of a ConvexBall."""
import math

import numpy as np

from halpern_rates.errors import ContractViolationError, DomainError
from halpern_rates.models.curvature import ModelPoint


class NonexpansiveMap:
    """Base class for catalog maps; subclasses implement ``_apply_vector``."""

    kind = None

    def __init__(self, ball):
        self.ball = ball

    def _apply_vector(self, vector):
        raise NotImplementedError

    def apply(self, point):
        from halpern_rates.services.map_service import MapService

        return MapService.apply(self, point)

    __call__ = apply

    def to_dict(self):
        return {"kind": self.kind}


class Rotation(NonexpansiveMap):
    """Rigid rotation by ``angle`` in a 2-plane tangent at the ball center.

    The rotation axis passes through the center, so the ball is invariant
    and the center is fixed.
    """

    kind = "rotation"

    def __init__(self, ball, angle, plane=None):
        super().__init__(ball)
        from halpern_rates.services.geometry_service import tangent_basis

        self.angle = float(angle)
        c = ball.center.direction
        if plane is None:
            basis = tangent_basis(c)
            e1, e2 = basis[0], basis[1]
        else:
            e1, e2 = (np.asarray(v, dtype=float) for v in plane)
            e1 = e1 - np.dot(e1, c) * c
            e1 = e1 / np.linalg.norm(e1)
            e2 = e2 - np.dot(e2, c) * c - np.dot(e2, e1) * e1
            norm = np.linalg.norm(e2)
            if norm < 1e-12:
                raise ContractViolationError("Rotation plane vectors are not independent")
            e2 = e2 / norm
        self.plane = (e1, e2)
        cos_a, sin_a = math.cos(self.angle), math.sin(self.angle)
        self.matrix = (
            np.eye(c.size)
            + (cos_a - 1.0) * (np.outer(e1, e1) + np.outer(e2, e2))
            + sin_a * (np.outer(e2, e1) - np.outer(e1, e2))
        )

    @property
    def axis(self):
        return self.ball.center

    def _apply_vector(self, vector):
        out = self.matrix @ vector
        return out / np.linalg.norm(out)

    def __repr__(self):
        return f"<Rotation angle={self.angle}>"

    def to_dict(self):
        return {
            "kind": self.kind,
            "angle": self.angle,
            "plane": [[float(v) for v in e] for e in self.plane],
        }


class GeodesicPull(NonexpansiveMap):
    """p -> point at fraction ``factor`` of the way from p to ``anchor``."""

    kind = "pull"

    def __init__(self, ball, anchor, factor):
        super().__init__(ball)
        factor = float(factor)
        if not 0.0 < factor < 1.0:
            raise DomainError(f"Pull factor {factor} outside (0, 1)")
        if not ball.contains(anchor):
            raise DomainError(f"Pull anchor {anchor} lies outside the ball")
        self.anchor = anchor
        self.factor = factor

    def _apply_vector(self, vector):
        from halpern_rates.services.geometry_service import slerp_vectors

        return slerp_vectors(vector, self.anchor.direction, self.factor)

    def __repr__(self):
        return f"<GeodesicPull factor={self.factor}>"

    def to_dict(self):
        return {"kind": self.kind, "anchor": self.anchor.to_list(), "factor": self.factor}


class Composition(NonexpansiveMap):
    """Maps applied left to right."""

    kind = "composition"

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise ContractViolationError("Composition needs at least one map")
        ball = maps[0].ball
        for m in maps[1:]:
            if m.ball.radius != ball.radius or m.ball.center != ball.center:
                raise ContractViolationError("Composed maps must share one ball")
        super().__init__(ball)
        self.maps = maps

    def _apply_vector(self, vector):
        for m in self.maps:
            vector = m._apply_vector(vector)
        return vector

    def __repr__(self):
        return f"<Composition of {len(self.maps)} maps>"

    def to_dict(self):
        return {"kind": self.kind, "maps": [m.to_dict() for m in self.maps]}


def as_point(vector):
    """Wrap a raw unit vector produced by a map."""
    return ModelPoint.from_vector(vector)
