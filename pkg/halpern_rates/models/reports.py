"""Result records returned by the services."""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional


def _jsonable(value):
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


@dataclass
class NonexpansiveReport:
    """Empirical nonexpansiveness of a map over sampled pairs."""

    max_expansion_ratio: float
    violations: int
    samples: int
    tolerance: float
    seed: int

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return asdict(self)


@dataclass
class ModuliReport:
    """Finite-prefix check of the alpha, gamma and theta clauses."""

    horizon: int
    alpha: Dict[str, bool] = field(default_factory=dict)
    gamma: Dict[str, bool] = field(default_factory=dict)
    theta_passed: bool = True
    theta_checked: int = 0
    theta_first_unchecked: Optional[int] = None
    theta_failures: List[int] = field(default_factory=list)

    @property
    def alpha_passed(self):
        return all(self.alpha.values())

    @property
    def gamma_passed(self):
        return all(self.gamma.values())

    @property
    def passed(self):
        return self.alpha_passed and self.gamma_passed and self.theta_passed

    def to_dict(self):
        data = asdict(self)
        data.update(
            alpha_passed=self.alpha_passed,
            gamma_passed=self.gamma_passed,
            passed=self.passed,
        )
        return data


@dataclass
class DivergenceReport:
    """Check of sum_{k<=rate(n)} weights_{k+1} >= n over a horizon."""

    horizon: int
    passed: bool
    checked: int
    first_unchecked: Optional[int]
    failures: List[int] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


@dataclass
class FuzzReport:
    """Outcome of one oracle campaign."""

    oracle: str
    trials: int
    accepted: int
    skipped: int
    exhausted: int
    violations: int
    max_residual: float
    worst_config: Optional[Dict[str, Any]]
    seed: int
    tolerance: float
    oracle_errors: int = 0

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        data = asdict(self)
        data["worst_config"] = _jsonable(self.worst_config)
        data["passed"] = self.passed
        return data


@dataclass
class Prop71Report:
    """Residuals of the gamma_n^t inequalities along a trace."""

    checked: int
    item_i_checked: int
    max_residual_i: float
    max_residual_ii: float
    max_residual_iv: float
    tolerance: float

    @property
    def max_residual(self):
        return max(self.max_residual_i, self.max_residual_ii, self.max_residual_iv)

    @property
    def passed(self):
        return self.max_residual <= self.tolerance

    def to_dict(self):
        data = asdict(self)
        data["passed"] = self.passed
        return data


@dataclass
class AoyamaReport:
    """Window verdict for a sequence obeying the perturbed recurrence."""

    theta: Any
    delta: Any
    window: Optional[List[int]]
    max_in_window: float
    eps: float
    holds: bool
    recurrence_residual: float

    def to_dict(self):
        return {
            "theta": _jsonable(self.theta),
            "delta": str(self.delta) if self.delta is not None else None,
            "window": self.window,
            "max_in_window": self.max_in_window,
            "eps": self.eps,
            "holds": self.holds,
            "recurrence_residual": self.recurrence_residual,
        }


@dataclass
class ExperimentReport:
    """Result of one CLI experiment."""

    command: str
    exit_code: int
    summary: List[str] = field(default_factory=list)
    payload: Dict[str, Any] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)

    @property
    def status(self):
        return {
            0: "ok",
            2: "configuration-error",
            3: "inequality-violation",
            4: "bound-violation",
            5: "inconclusive",
        }.get(self.exit_code, "unknown")

    def to_dict(self):
        return {
            "command": self.command,
            "status": self.status,
            "exit_code": self.exit_code,
            **_jsonable(self.payload),
        }


def jsonable(value):
    """Public alias used by the export helpers."""
    return _jsonable(value)


@dataclass
class RateTowerReport:
    """Every intermediate of the metastability tower, keyed by its symbol.

    ``values`` maps the symbols (ε₀, B, Γ, θ⁺, S, T, χ, χ*, L, Θ, Δ*, f,
    f*, f̃*, A, Σ) to the values at the reporting index; ``evaluator``
    re-evaluates any indexed quantity on demand.
    """

    eps: Any
    kappa: float
    M: Any
    g: Any
    values: Dict[str, Any]
    orbit: List[Any]
    orbit_length: int
    k0_range: List[Any]
    n_candidates: List[Any]
    sigma: Any
    flags: Dict[str, bool] = field(default_factory=dict)
    guard_band_hits: List[dict] = field(default_factory=list)
    evaluator: Any = None

    @property
    def is_estimate(self):
        return bool(getattr(self.sigma, "is_estimate", False))

    def to_dict(self):
        return {
            "eps": str(self.eps),
            "kappa": self.kappa,
            "M": str(self.M),
            "g": _jsonable(self.g),
            "values": {key: _jsonable(value) for key, value in self.values.items()},
            "orbit": _jsonable(self.orbit),
            "orbit_length": self.orbit_length,
            "K0_range": _jsonable(self.k0_range),
            "N_candidates": _jsonable(self.n_candidates),
            "Σ": _jsonable(self.sigma),
            "estimate": self.is_estimate,
            "flags": dict(self.flags),
            "guard_band_hits": list(self.guard_band_hits),
        }
