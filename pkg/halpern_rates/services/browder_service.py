"""Browder service - resolvent contractions, certified fixed points, metastability."""
import logging
import math

import numpy as np

from halpern_rates import current_runtime
from halpern_rates.errors import DomainError, ExhaustedError, NonConvergenceError
from halpern_rates.models.browder import BrowderPoint
from halpern_rates.models.curvature import ModelPoint
from halpern_rates.services.geometry_service import (
    GeometryService,
    angle_between,
    max_pairwise_angle,
    slerp_vectors,
)
from halpern_rates.services.map_service import MapService
from halpern_rates.services.schedule_service import cos_data

logger = logging.getLogger(__name__)


def _check_t(t):
    t = float(t)
    if not 0.0 < t < 1.0:
        raise DomainError(f"Resolvent parameter t = {t} outside (0, 1)")
    return t


class BrowderService:
    """Service for the approximants z_t^u and their metastability."""

    @staticmethod
    def q_factor(t, M, curvature):
        """sin((1 - t) M sqrt(kappa)) / sin(M sqrt(kappa))."""
        k, _, _ = cos_data(M, curvature)
        return math.sin((1.0 - float(t)) * k) / math.sin(k)

    @staticmethod
    def contraction_apply(u, t, nonexpansive_map, y):
        """T_t^u(y) = t u + (1 - t) T y."""
        t = _check_t(t)
        ball = nonexpansive_map.ball
        if not MapService.contains(ball, u) or not MapService.contains(ball, y):
            raise DomainError("Resolvent inputs must lie in the ball")
        ty = MapService.apply(nonexpansive_map, y)
        return GeometryService.geodesic_point(u, ty, 1.0 - t, ball.curvature)

    @staticmethod
    def defining_residual(point, u, nonexpansive_map):
        """d(z, T_t^u z) for an approximant."""
        if point.t == 1.0:
            return GeometryService.distance(point.z, u, nonexpansive_map.ball.curvature)
        image = BrowderService.contraction_apply(u, point.t, nonexpansive_map, point.z)
        return GeometryService.distance(point.z, image, nonexpansive_map.ball.curvature)

    @staticmethod
    def solve_fixed_point(u, t, nonexpansive_map, tol=None, start=None, max_iter=None):
        """Picard iteration y_{k+1} = T_t^u(y_k) with an a-posteriori stop.

        Stops once q_t/(1 - q_t) d(y_k, y_{k-1}) <= tol, which bounds
        d(y_k, z_t^u) by tol.

        Args:
            u: anchor ModelPoint
            t: resolvent parameter in (0, 1)
            nonexpansive_map: catalog map T
            tol: certified distance bound (default SOLVER_TOL_FACTOR * M)
            start: first iterate (default u)
            max_iter: iteration cap (default PICARD_MAX_ITER)

        Returns:
            BrowderPoint
        """
        t = _check_t(t)
        ball = nonexpansive_map.ball
        config = current_runtime().config
        M = ball.diameter_bound
        if tol is None:
            tol = config["SOLVER_TOL_FACTOR"] * M
        if tol <= 0:
            raise DomainError("Solver tolerance must be positive")
        if max_iter is None:
            max_iter = int(config["PICARD_MAX_ITER"])
        if not MapService.contains(ball, u):
            raise DomainError(f"Anchor {u} lies outside the ball")

        q = BrowderService.q_factor(t, M, ball.curvature)
        gain = q / (1.0 - q)
        scale = 1.0 / ball.curvature.sqrt_kappa
        uv = u.direction
        y = uv if start is None else start.direction
        iterations = 0
        while True:
            y_next = slerp_vectors(uv, nonexpansive_map._apply_vector(y), 1.0 - t)
            step = angle_between(y, y_next) * scale
            y = y_next
            iterations += 1
            if gain * step <= tol:
                break
            if iterations >= max_iter:
                raise NonConvergenceError(
                    f"Picard iteration for t={t} did not reach tol={tol} in {max_iter} steps"
                )
        return BrowderPoint(
            t=t,
            z=ModelPoint.from_vector(y),
            residual=gain * step,
            q_t=q,
            iterations=iterations,
        )

    @staticmethod
    def resolvent_family(u, nonexpansive_map, i_max, tol=None, family=None):
        """z_i^u for t_i = 1/(i+1), i = 0..i_max.

        Index 0 (t = 1) is u itself. Each solve starts from the previous
        approximant; an existing ``family`` prefix is extended in place of
        being recomputed.
        """
        i_max = int(i_max)
        if i_max < 0:
            raise DomainError("i_max must be nonnegative")
        out = list(family or [])
        if not out:
            out.append(BrowderPoint(t=1.0, z=u, residual=0.0, q_t=0.0, iterations=0, index=0))
        for i in range(len(out), i_max + 1):
            point = BrowderService.solve_fixed_point(
                u, 1.0 / (i + 1), nonexpansive_map, tol=tol, start=out[-1].z
            )
            out.append(
                BrowderPoint(
                    t=point.t,
                    z=point.z,
                    residual=point.residual,
                    q_t=point.q_t,
                    iterations=point.iterations,
                    index=i,
                )
            )
        return out[: i_max + 1]

    @staticmethod
    def check_family_monotone(family, u, tol, curvature):
        """(monotone, largest drop) for i -> d(u, z_i), allowing drops up to 2 tol."""
        distances = [GeometryService.distance(u, point.z, curvature) for point in family]
        drops = [a - b for a, b in zip(distances, distances[1:])]
        largest = max(drops, default=0.0)
        return largest <= 2 * tol, largest

    @staticmethod
    def browder_window_threshold(eps, M, kappa):
        """(1 - cos eps) / (sqrt(kappa) tan(M sqrt(kappa)))."""
        k = float(M) * math.sqrt(kappa)
        return (1.0 - math.cos(float(eps))) / (math.sqrt(kappa) * math.tan(k))

    @staticmethod
    def window_diameter(vectors, start, stop, threshold_angle=None):
        """Largest angle among rows start..stop-1.

        With ``threshold_angle`` given, a cheaper value on the same side of
        the threshold may be returned instead.
        """
        block = vectors[start:stop]
        if len(block) <= 1:
            return 0.0
        anchor = block[0]
        radial = float(np.max(2.0 * np.arctan2(
            np.linalg.norm(block - anchor, axis=1), np.linalg.norm(block + anchor, axis=1)
        )))
        if threshold_angle is not None:
            if radial > threshold_angle or 2.0 * radial <= threshold_angle:
                return radial
        return max_pairwise_angle(block)

    @staticmethod
    def empirical_browder_metastability(family, eps, g, curvature, tol=None):
        """Smallest K with d(z_i, z_j) <= eps/sqrt(kappa) for i, j in [K, K + g(K)].

        The effective threshold is eps/sqrt(kappa) - 4 tol.

        Raises:
            ExhaustedError: a window runs past the end of the family before
                a passing K is found
        """
        eps = float(eps)
        if not 0.0 < eps < 1.0:
            raise DomainError(f"eps = {eps} outside (0, 1)")
        if tol is None:
            tol = max((p.residual for p in family), default=0.0)
        threshold = eps / curvature.sqrt_kappa - 4.0 * tol
        threshold_angle = threshold * curvature.sqrt_kappa
        vectors = np.array([p.z.direction for p in family])
        for K in range(len(family)):
            stop = K + int(g(K)) + 1
            if stop > len(family):
                raise ExhaustedError(
                    f"Window [{K}, {stop - 1}] exceeds the family of {len(family)} approximants"
                )
            diameter = BrowderService.window_diameter(vectors, K, stop, threshold_angle)
            if diameter <= threshold_angle:
                return K
        raise ExhaustedError("Family is empty")
