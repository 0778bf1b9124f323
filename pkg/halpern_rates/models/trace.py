"""Halpern iteration traces."""
from halpern_rates.errors import ContractViolationError
from halpern_rates.models.curvature import ModelPoint

TRACE_FORMAT = "halpern-trace/1"
TRACE_COLUMNS = ("n", "lambda_next", "step", "residual", "fixed_distance")


class IterationTrace:
    """x_0 = u, ..., x_N together with the per-step distance sequences.

    ``step_distances[n]`` is d(x_n, x_{n+1}) for n < N, ``residual_distances[n]``
    is d(x_n, T x_n) for n <= N. In streaming mode only the last two points
    are retained.
    """

    def __init__(self, u, nonexpansive_map, schedule, points, step_distances,
                 residual_distances, fixed_distances=None, streaming=False, length=None):
        self.u = u
        self.map = nonexpansive_map
        self.schedule = schedule
        self.ball = nonexpansive_map.ball
        self.points = points
        self.step_distances = step_distances
        self.residual_distances = residual_distances
        self.fixed_distances = fixed_distances
        self.streaming = streaming
        self.length = len(residual_distances) - 1 if length is None else length

    @property
    def N(self):
        return self.length

    def __len__(self):
        return self.length + 1

    def point(self, n):
        """x_n as a ModelPoint (any n in memory mode, the last two when streaming)."""
        if self.streaming:
            offset = n - (self.length + 1 - len(self.points))
            if not 0 <= offset < len(self.points):
                raise ContractViolationError(f"x_{n} is not retained in streaming mode")
            return ModelPoint.from_vector(self.points[offset])
        return ModelPoint.from_vector(self.points[n])

    @property
    def last(self):
        return self.point(self.length)

    def vectors(self):
        """All stored points as an array; memory mode only."""
        if self.streaming:
            raise ContractViolationError("Streaming traces do not keep every point")
        return self.points

    def lambda_next(self):
        """lambda_{n+1} for n = 0..N-1."""
        return self.schedule.values(1, self.length + 1)

    def rows(self):
        """CSV rows in TRACE_COLUMNS order."""
        lam = self.lambda_next()
        fixed = self.fixed_distances
        for n in range(self.length + 1):
            yield (
                n,
                repr(float(lam[n])) if n < self.length else "",
                repr(float(self.step_distances[n])) if n < self.length else "",
                repr(float(self.residual_distances[n])),
                repr(float(fixed[n])) if fixed is not None else "",
            )

    def __repr__(self):
        mode = "streaming" if self.streaming else "memory"
        return f"<IterationTrace N={self.length} {mode}>"

    def to_dict(self):
        return {
            "N": self.length,
            "streaming": self.streaming,
            "u": self.u.to_list(),
            "last": self.last.to_list(),
            "map": self.map.to_dict(),
            "schedule": self.schedule.name,
            "final_step": float(self.step_distances[-1]) if self.length else 0.0,
            "final_residual": float(self.residual_distances[-1]),
        }
