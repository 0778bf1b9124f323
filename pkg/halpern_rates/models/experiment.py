"""Experiment configuration."""
import math
from fractions import Fraction

from halpern_rates.errors import ConfigurationError, DomainError
from halpern_rates.models.gfunction import GFunction
from halpern_rates.utils.numeric import to_rational

DEFAULT_EPS_GRID = (0.05, 0.1, 0.2)
DEFAULT_BROWDER_DEPTH = 64


def _as_list(value, name):
    if value is None:
        return []
    if isinstance(value, (int, float, str)):
        value = [value]
    try:
        return [to_rational(v) for v in value]
    except (TypeError, ValueError, DomainError) as exc:
        raise ConfigurationError(f"Invalid {name} grid {value!r}: {exc}") from exc


class ExperimentConfig:
    """Resolved sections of an experiment configuration file.

    Sections: ``space`` {kappa, dim}, ``ball`` {center, radius}, ``map``,
    ``schedule``, ``eps`` (grid), ``g``, ``seed``, ``horizon``,
    ``browder`` {depth, tol, u}, ``fuzz`` {oracles, trials, workers},
    ``aoyama`` {eps, L, theta, psi, g}, ``rates`` {tower, P},
    ``start`` (anchor u) and ``output`` {dir}.
    """

    def __init__(self, data=None, seed=None, out_dir=None, digit_budget=None,
                 log_estimate=False):
        from halpern_rates import current_runtime

        data = dict(data or {})
        config = current_runtime().config
        self.raw = data
        self.space = dict(data.get("space") or {})
        self.ball = dict(data.get("ball") or {"radius": 0.05})
        self.map = dict(data.get("map") or {"kind": "pull"})
        self.schedule = dict(data.get("schedule") or {"kind": "harmonic"})
        self.eps = _as_list(data.get("eps", list(DEFAULT_EPS_GRID)), "eps")
        self.g = GFunction.from_spec(data.get("g") or {"kind": "constant", "c": 1})
        self.start = data.get("start")
        self.browder = dict(data.get("browder") or {})
        self.fuzz = dict(data.get("fuzz") or {})
        self.aoyama = data.get("aoyama")
        self.rates = dict(data.get("rates") or {})
        self.log_estimate = bool(log_estimate or data.get("log_estimate", False))

        self.seed = int(seed if seed is not None else data.get("seed", config["DEFAULT_SEED"]))
        self.horizon = int(data.get("horizon", config["DEFAULT_HORIZON"]))
        self.digit_budget = int(
            digit_budget if digit_budget is not None
            else data.get("digit_budget", config["DIGIT_BUDGET"])
        )
        output = dict(data.get("output") or {})
        self.out_dir = out_dir or output.get("dir") or config["OUTPUT_DIR"]
        self.validate()

    def validate(self):
        try:
            radius = float(self.ball["radius"])
            kappa = float(self.space.get("kappa", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"Invalid space/ball section: {exc}") from exc
        if kappa <= 0:
            raise ConfigurationError(f"kappa must be positive, got {kappa}")
        if not 0 < radius < math.pi / (4 * math.sqrt(kappa)):
            raise ConfigurationError(f"Ball radius {radius} must lie in (0, D_kappa/4)")
        if not self.eps:
            raise ConfigurationError("The eps grid is empty")
        if any(e <= 0 for e in self.eps):
            raise ConfigurationError("Every eps must be positive")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be at least 1")
        if self.digit_budget < 1:
            raise ConfigurationError("digit_budget must be at least 1")

    def eps_in(self, low, high):
        """Grid restricted to (low, high); raises when nothing is left."""
        grid = [e for e in self.eps if Fraction(low) < e < Fraction(high)]
        if not grid:
            raise ConfigurationError(f"No eps of the grid lies in ({low}, {high})")
        return grid

    def to_dict(self):
        return {
            "space": self.space,
            "ball": self.ball,
            "map": self.map,
            "schedule": self.schedule,
            "eps": [str(e) for e in self.eps],
            "g": self.g.to_dict(),
            "start": self.start,
            "browder": self.browder,
            "fuzz": self.fuzz,
            "aoyama": self.aoyama,
            "rates": self.rates,
            "seed": self.seed,
            "horizon": self.horizon,
            "digit_budget": self.digit_budget,
            "log_estimate": self.log_estimate,
        }
