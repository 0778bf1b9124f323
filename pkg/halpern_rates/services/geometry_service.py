"""Geometry service - distances, geodesics and comparison triangles on M^n_kappa."""
import math

import numpy as np

from halpern_rates.errors import (
    ContractViolationError,
    DegenerateTriangleError,
    DomainError,
    InfeasibleTriangleError,
)
from halpern_rates.models.curvature import ComparisonTriangle, Curvature, ModelPoint
from halpern_rates.utils.numeric import clamp_unit

# Angles closer than this count as coincident or antipodal
ANGLE_EPS = 1e-12


def angle_between(p, q):
    """Unscaled spherical angle between two unit vectors.

    Uses 2*atan2(|p - q|, |p + q|), which stays accurate near 0 and pi
    where arccos of the inner product loses half the digits.
    """
    return 2.0 * math.atan2(float(np.linalg.norm(p - q)), float(np.linalg.norm(p + q)))


def slerp_vectors(p, q, t):
    """Point at fraction t of the great-circle arc from p to q."""
    omega = angle_between(p, q)
    if omega < ANGLE_EPS:
        return p
    if omega >= math.pi - ANGLE_EPS:
        raise DomainError("Geodesic between antipodal points is not unique")
    if t == 0:
        return p
    if t == 1:
        return q
    sin_omega = math.sin(omega)
    out = (math.sin((1.0 - t) * omega) / sin_omega) * p + (math.sin(t * omega) / sin_omega) * q
    return out / np.linalg.norm(out)


def max_pairwise_angle(points, chunk=512):
    """Largest unscaled angle between any two rows of ``points``."""
    points = np.asarray(points, dtype=float)
    count = points.shape[0]
    best = 0.0
    for start in range(0, count, chunk):
        block = points[start:start + chunk]
        diff = np.linalg.norm(block[:, None, :] - points[None, :, :], axis=-1)
        summ = np.linalg.norm(block[:, None, :] + points[None, :, :], axis=-1)
        best = max(best, float(np.max(2.0 * np.arctan2(diff, summ))))
    return best


def tangent_basis(p):
    """Orthonormal basis (rows) of the tangent space at unit vector p."""
    p = np.asarray(p, dtype=float)
    d = p.size
    q, _ = np.linalg.qr(np.column_stack([p, np.eye(d)]))
    return q[:, 1:d].T.copy()


def _hav(x):
    return math.sin(x / 2.0) ** 2


class GeometryService:
    """Service for exact model-space geometry."""

    @staticmethod
    def _check_pair(p, q, curvature=None):
        if p.direction.size != q.direction.size:
            raise ContractViolationError(
                f"Dimension mismatch: {p.direction.size} vs {q.direction.size}"
            )
        if curvature is not None and p.direction.size != curvature.ambient_dim:
            raise ContractViolationError(
                f"Point has {p.direction.size} coordinates, "
                f"curvature expects {curvature.ambient_dim}"
            )

    @staticmethod
    def distance(p, q, curvature):
        """Geodesic distance between two points.

        Args:
            p: ModelPoint
            q: ModelPoint
            curvature: Curvature of the model space

        Returns:
            Length in [0, D_kappa]
        """
        GeometryService._check_pair(p, q, curvature)
        return angle_between(p.direction, q.direction) / curvature.sqrt_kappa

    @staticmethod
    def geodesic_point(p, q, t, curvature):
        """Point w on [p, q] with d(p, w) = t d(p, q).

        Args:
            p: start ModelPoint
            q: end ModelPoint
            t: parameter in [0, 1] measured from p
            curvature: Curvature

        Returns:
            ModelPoint on the unique geodesic
        """
        GeometryService._check_pair(p, q, curvature)
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"Geodesic parameter {t} outside [0, 1]")
        out = slerp_vectors(p.direction, q.direction, t)
        if out is p.direction:
            return p
        if out is q.direction:
            return q
        return ModelPoint(out)

    @staticmethod
    def vertex_angle(x, y, z, curvature):
        """Angle at x of the geodesic triangle (x, y, z)."""
        GeometryService._check_pair(x, y, curvature)
        GeometryService._check_pair(x, z, curvature)
        xv, yv, zv = x.direction, y.direction, z.direction
        axy, axz, ayz = angle_between(xv, yv), angle_between(xv, zv), angle_between(yv, zv)
        if axy < ANGLE_EPS or axz < ANGLE_EPS:
            raise DegenerateTriangleError("Vertex coincides with an adjacent vertex")
        if max(axy, axz, ayz) >= math.pi - ANGLE_EPS:
            raise DomainError("Triangle side reaches the diameter D_kappa")
        ty = yv - float(np.dot(xv, yv)) * xv
        tz = zv - float(np.dot(xv, zv)) * xv
        ty = ty / np.linalg.norm(ty)
        tz = tz / np.linalg.norm(tz)
        gamma = angle_between(ty, tz)
        return min(max(gamma, 0.0), math.pi)

    @staticmethod
    def side_from_angle(dxy, dxz, gamma, curvature):
        """Third side from two sides and the included angle (law of cosines)."""
        k = curvature.sqrt_kappa
        a, b = dxy * k, dxz * k
        cos_c = math.cos(a) * math.cos(b) + math.sin(a) * math.sin(b) * math.cos(gamma)
        return math.acos(clamp_unit(cos_c)) / k

    @staticmethod
    def comparison_triangle(dxy, dyz, dzx, curvature):
        """Comparison triangle in M^2_kappa with the given side lengths.

        x̄ sits at the pole (0, 0, 1), ȳ in the x-z plane with nonnegative
        first coordinate and z̄ with nonnegative second coordinate.
        """
        k = curvature.sqrt_kappa
        a, c, b = dxy * k, dyz * k, dzx * k
        sides = (a, b, c)
        if min(sides) < 0:
            raise InfeasibleTriangleError(f"Negative side length in {sides}")
        if max(sides) >= math.pi - ANGLE_EPS:
            raise InfeasibleTriangleError(f"Side length reaches D_kappa: {sides}")
        tol = 1e-12 * max(1.0, max(sides))
        if a > b + c + tol or b > a + c + tol or c > a + b + tol:
            raise InfeasibleTriangleError(f"Triangle inequality fails for {sides}")
        if a + b + c >= 2 * math.pi - ANGLE_EPS:
            raise InfeasibleTriangleError("Perimeter reaches 2 D_kappa")

        denom = math.sin(a) * math.sin(b)
        if denom < 1e-300:
            gamma = 0.0
        else:
            hav_gamma = (_hav(c) - _hav(a - b)) / denom
            gamma = 2.0 * math.asin(math.sqrt(min(max(hav_gamma, 0.0), 1.0)))

        plane = Curvature(curvature.kappa, 2)
        xbar = ModelPoint((0.0, 0.0, 1.0))
        ybar = ModelPoint.from_vector((math.sin(a), 0.0, math.cos(a)))
        zbar = ModelPoint.from_vector(
            (math.sin(b) * math.cos(gamma), math.sin(b) * math.sin(gamma), math.cos(b))
        )
        return ComparisonTriangle(xbar, ybar, zbar, plane)

    @staticmethod
    def cat_inequality_residual(x, y, z, s, t, curvature):
        """d(p̄, q̄) - d(p, q) for p on [x, y] at s and q on [x, z] at t."""
        dist = GeometryService.distance
        tri = GeometryService.comparison_triangle(
            dist(x, y, curvature), dist(y, z, curvature), dist(z, x, curvature), curvature
        )
        p = slerp_vectors(x.direction, y.direction, float(s))
        q = slerp_vectors(x.direction, z.direction, float(t))
        pbar = slerp_vectors(tri.xbar.direction, tri.ybar.direction, float(s))
        qbar = slerp_vectors(tri.xbar.direction, tri.zbar.direction, float(t))
        return (angle_between(pbar, qbar) - angle_between(p, q)) / curvature.sqrt_kappa

    @staticmethod
    def exp_point(center, tangent, length, curvature):
        """Walk ``length`` from center along the unit tangent direction."""
        r = length * curvature.sqrt_kappa
        out = math.cos(r) * center.direction + math.sin(r) * np.asarray(tangent, dtype=float)
        return ModelPoint.from_vector(out)
