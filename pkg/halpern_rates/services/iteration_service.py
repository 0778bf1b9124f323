"""Iteration service - Halpern iteration, regularity sequences, recurrence checks."""
import logging

import numpy as np

from halpern_rates import current_runtime
from halpern_rates.errors import (
    ContractViolationError,
    DomainError,
    ExhaustedError,
    UnsupportedAnalysisError,
)
from halpern_rates.models.trace import IterationTrace
from halpern_rates.services.geometry_service import angle_between, slerp_vectors
from halpern_rates.services.browder_service import BrowderService
from halpern_rates.services.map_service import MapService
from halpern_rates.services.schedule_service import ScheduleService

logger = logging.getLogger(__name__)


class IterationService:
    """Service for running and inspecting Halpern iterations."""

    @staticmethod
    def iterate(u, nonexpansive_map, schedule, N, streaming=None):
        """Run x_{n+1} = lambda_{n+1} u + (1 - lambda_{n+1}) T x_n from x_0 = u.

        Args:
            u: anchor and start ModelPoint (must lie in the map's ball)
            nonexpansive_map: catalog map T
            schedule: ModuliSchedule supplying lambda
            N: number of steps
            streaming: keep only the last two points; chosen automatically
                when N + 1 exceeds TRACE_CAP

        Returns:
            IterationTrace
        """
        N = int(N)
        if N < 0:
            raise DomainError("N must be nonnegative")
        ball = nonexpansive_map.ball
        if not MapService.contains(ball, u):
            raise DomainError(f"Start point {u} lies outside the ball")
        cap = int(current_runtime().config["TRACE_CAP"])
        if streaming is None:
            streaming = N + 1 > cap
            if streaming:
                logger.warning(f"Trace of {N + 1} points exceeds TRACE_CAP={cap}; streaming")

        try:
            fixed = MapService.fixed_point_of(nonexpansive_map).direction
        except UnsupportedAnalysisError:
            fixed = None

        scale = 1.0 / ball.curvature.sqrt_kappa
        lam = schedule.values(1, N + 1)
        uv = u.direction
        step = np.empty(N)
        residual = np.empty(N + 1)
        fixed_d = np.empty(N + 1) if fixed is not None else None
        points = None if streaming else np.empty((N + 1, uv.size))

        x = uv
        if points is not None:
            points[0] = x
        prev = x
        for n in range(N):
            tx = nonexpansive_map._apply_vector(x)
            residual[n] = angle_between(x, tx)
            if fixed_d is not None:
                fixed_d[n] = angle_between(x, fixed)
            x_next = slerp_vectors(uv, tx, 1.0 - float(lam[n]))
            step[n] = angle_between(x, x_next)
            prev, x = x, x_next
            if points is not None:
                points[n + 1] = x
        residual[N] = angle_between(x, nonexpansive_map._apply_vector(x))
        if fixed_d is not None:
            fixed_d[N] = angle_between(x, fixed)
            fixed_d *= scale

        if streaming:
            points = np.array([prev, x]) if N >= 1 else np.array([x])
        logger.debug(f"Halpern run of {N} steps finished at residual {residual[N] * scale!r}")
        return IterationTrace(
            u,
            nonexpansive_map,
            schedule,
            points,
            step * scale,
            residual * scale,
            fixed_d,
            streaming=streaming,
            length=N,
        )

    @staticmethod
    def regularity_indices(trace, nonexpansive_map=None):
        """(d(x_n, x_{n+1}))_n and (d(x_n, T x_n))_n of a trace."""
        if nonexpansive_map is not None and nonexpansive_map is not trace.map:
            raise ContractViolationError("Trace was produced by a different map")
        return trace.step_distances, trace.residual_distances

    @staticmethod
    def check_recurrence(trace, schedule, M, curvature):
        """Largest value of

            d(x_n, x_{n+1}) - (1 - mu_{n+1}) d(x_{n-1}, x_n) - M |lambda_{n+1} - lambda_n|

        over n >= 1. A result <= 1e-9 certifies the recurrence on the trace.
        """
        N = trace.length
        if N + 1 < 3:
            raise ContractViolationError("Recurrence check needs at least 3 points")
        step = trace.step_distances
        mu_next = ScheduleService.mu_values(schedule, 2, N + 1, M, curvature)
        lam_next = schedule.values(2, N + 1)
        lam_cur = schedule.values(1, N)
        rhs = (1.0 - mu_next) * step[: N - 1] + float(M) * np.abs(lam_next - lam_cur)
        return float(np.max(step[1:N] - rhs))

    @staticmethod
    def check_residual_bound(trace, schedule, M):
        """Largest value of d(x_n, T x_n) - d(x_n, x_{n+1}) - M lambda_{n+1} over n >= 1."""
        N = trace.length
        if N < 2:
            raise ContractViolationError("Residual bound check needs at least 3 points")
        lam_next = schedule.values(2, N + 1)
        rhs = trace.step_distances[1:N] + float(M) * lam_next
        return float(np.max(trace.residual_distances[1:N] - rhs))

    @staticmethod
    def first_stable_index(seq, eps):
        """Smallest n with every later entry <= eps, or None if the last entry exceeds eps."""
        if eps <= 0:
            raise DomainError(f"eps must be positive, got {eps}")
        seq = np.asarray(seq, dtype=float)
        above = np.flatnonzero(seq > eps)
        if above.size == 0:
            return 0
        last = int(above[-1])
        if last == seq.size - 1:
            return None
        return last + 1

    @staticmethod
    def empirical_metastability(trace, eps, g):
        """Smallest N with d(x_n, x_m) <= eps for all n, m in [N, N + g(N)].

        Raises:
            ExhaustedError: a window runs past x_N before a passing N is found
        """
        eps = float(eps)
        if eps <= 0:
            raise DomainError(f"eps must be positive, got {eps}")
        vectors = trace.vectors()
        threshold_angle = eps * trace.ball.curvature.sqrt_kappa
        for N in range(len(vectors)):
            stop = N + int(g(N)) + 1
            if stop > len(vectors):
                raise ExhaustedError(
                    f"Window [{N}, {stop - 1}] exceeds the trace of {len(vectors)} points"
                )
            diameter = BrowderService.window_diameter(vectors, N, stop, threshold_angle)
            if diameter <= threshold_angle:
                return N
        raise ExhaustedError("Trace is empty")
