"""Browder approximants z_t^u."""
from dataclasses import dataclass

from halpern_rates.models.curvature import ModelPoint

FAMILY_FORMAT = "browder-family/1"
FAMILY_COLUMNS = ("i", "t_i", "d_u_z", "residual")


@dataclass(frozen=True)
class BrowderPoint:
    """Certified approximation z of the fixed point of y -> t u + (1 - t) T y.

    ``residual`` bounds d(z, z_t^u); ``q_t`` is the contraction factor used
    for the certificate.
    """

    t: float
    z: ModelPoint
    residual: float
    q_t: float
    iterations: int = 0
    index: int = -1

    def __repr__(self):
        return f"<BrowderPoint t={self.t:.6g} residual={self.residual:.3g}>"

    def to_dict(self):
        return {
            "index": self.index,
            "t": self.t,
            "z": self.z.to_list(),
            "residual": self.residual,
            "q_t": self.q_t,
            "iterations": self.iterations,
        }
