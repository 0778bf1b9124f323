"""Schedule service - moduli, mu_n and finite-prefix validation."""
import logging
import math

import numpy as np

from halpern_rates.errors import ConfigurationError, DomainError
from halpern_rates.models.bigcount import BigCount
from halpern_rates.models.reports import DivergenceReport, ModuliReport
from halpern_rates.models.schedule import EpsilonModulus, LambdaRule, ModuliSchedule, ThetaRule
from halpern_rates.utils.numeric import ceil_rational, to_rational

logger = logging.getLogger(__name__)

ALPHA_TOLERANCE = 1e-15
GAMMA_TOLERANCE = 1e-12
THETA_TOLERANCE = 1e-12


def cos_data(M, curvature):
    """(k, cos k as a rational, ceil(1/cos k)) for k = M sqrt(kappa) in (0, pi/2)."""
    k = float(M) * curvature.sqrt_kappa
    if not 0.0 < k < math.pi / 2:
        raise DomainError(f"M sqrt(kappa) = {k} outside (0, pi/2)")
    cos_frac = to_rational(math.cos(k))
    ceilc = ceil_rational(1 / cos_frac, label="1/cos(M sqrt kappa)")
    return k, cos_frac, ceilc


def _prefix_sums(weights):
    """P[m] = sum of the first m weights, with P[0] = 0."""
    return np.concatenate(([0.0], np.cumsum(weights)))


def _check_divergence(rate, sums, horizon):
    """Check sums[rate(n)] >= n for every n with rate(n) <= horizon."""
    failures = []
    checked = 0
    first_unchecked = None
    for n in range(1, horizon + 2):
        target = rate(n)
        if target > horizon:
            first_unchecked = n
            break
        if sums[int(target)] < n - THETA_TOLERANCE:
            failures.append(n)
        checked += 1
    return checked, first_unchecked, failures


class ScheduleService:
    """Service for step-size schedules and condition (*)."""

    @staticmethod
    def harmonic_schedule():
        """lambda_n = 1/(n+1) with its closed-form moduli."""
        return ModuliSchedule.harmonic()

    @staticmethod
    def adversarial_schedule():
        return ModuliSchedule.adversarial()

    @staticmethod
    def verify_moduli_prefix(schedule, horizon, eps_grid):
        """Check the alpha, gamma and theta clauses on the prefix up to horizon.

        Args:
            schedule: ModuliSchedule
            horizon: largest index n the clauses are evaluated at
            eps_grid: epsilons for the alpha and gamma clauses

        Returns:
            ModuliReport; theta indices with theta(n) > horizon are unchecked
        """
        horizon = int(horizon)
        if horizon < 1:
            raise DomainError("horizon must be at least 1")
        # lam[i] = lambda_{i+1}, i = 0..horizon
        lam = schedule.values(1, horizon + 2)
        report = ModuliReport(horizon=horizon)

        for eps in eps_grid:
            key = str(eps)
            eps_f = float(eps)
            a = schedule.alpha(eps)
            if a > horizon:
                report.alpha[key] = True
            else:
                tail = lam[int(a):horizon + 1]
                report.alpha[key] = bool(tail.size == 0 or tail.max() <= eps_f + ALPHA_TOLERANCE)

            g = schedule.gamma(eps)
            if g >= horizon:
                report.gamma[key] = True
            else:
                diffs = np.abs(np.diff(lam))  # diffs[i-1] = |lambda_{i+1} - lambda_i|
                total = float(diffs[int(g):horizon].sum())
                report.gamma[key] = total <= eps_f + GAMMA_TOLERANCE

        sums = _prefix_sums(lam[1:])
        checked, first_unchecked, failures = _check_divergence(schedule.theta, sums, horizon)
        report.theta_checked = checked
        report.theta_first_unchecked = first_unchecked
        report.theta_failures = failures
        report.theta_passed = not failures
        if not report.passed:
            logger.warning(f"{schedule!r} fails condition (*) on the prefix: {report.to_dict()}")
        return report

    @staticmethod
    def mu(schedule, n, M, curvature):
        """mu_n = 1 - sin((1 - lambda_n) k)/sin k with k = M sqrt(kappa)."""
        k, _, _ = cos_data(M, curvature)
        lam = schedule.lam_float(n)
        return 1.0 - math.sin((1.0 - lam) * k) / math.sin(k)

    @staticmethod
    def mu_values(schedule, start, stop, M, curvature):
        """Float array of mu_n for start <= n < stop."""
        k, _, _ = cos_data(M, curvature)
        lam = schedule.values(start, stop)
        return 1.0 - np.sin((1.0 - lam) * k) / math.sin(k)

    @staticmethod
    def theta_tilde(schedule, n, M, curvature):
        """theta~(n) = theta(ceil(1/cos(M sqrt(kappa))) n)."""
        if n < 1:
            raise DomainError(f"theta~ is indexed from 1, got {n}")
        _, _, ceilc = cos_data(M, curvature)
        return schedule.theta(BigCount.coerce(n) * ceilc)

    @staticmethod
    def verify_mu_divergence(schedule, M, curvature, horizon):
        """Check sum_{k=1}^{theta~(n)} mu_{k+1} >= n where theta~(n) <= horizon."""
        horizon = int(horizon)
        mus = ScheduleService.mu_values(schedule, 2, horizon + 2, M, curvature)
        sums = _prefix_sums(mus)
        checked, first_unchecked, failures = _check_divergence(
            lambda n: ScheduleService.theta_tilde(schedule, n, M, curvature), sums, horizon
        )
        return DivergenceReport(
            horizon=horizon,
            passed=not failures,
            checked=checked,
            first_unchecked=first_unchecked,
            failures=failures,
        )

    @staticmethod
    def build_modulus(spec, default):
        if spec is None:
            return default
        spec = dict(spec)
        kind = spec.pop("kind", "reciprocal")
        if kind == "reciprocal":
            return EpsilonModulus.reciprocal(spec.get("scale", 1))
        if kind == "constant":
            return EpsilonModulus.constant(spec.get("value", 1))
        raise ConfigurationError(f"Unknown modulus kind '{kind}'")

    @staticmethod
    def build_theta(spec, default=None):
        if spec is None:
            if default is None:
                raise ConfigurationError("Custom schedules must supply theta")
            return default
        spec = dict(spec)
        kind = spec.pop("kind", "power")
        try:
            if kind == "table":
                return ThetaRule.table(spec["values"], spec.get("default"))
            return ThetaRule(kind, **spec)
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"Invalid theta specification: {exc}") from exc

    @staticmethod
    def build_schedule(spec):
        """ModuliSchedule from the ``schedule`` configuration section."""
        spec = dict(spec or {})
        kind = spec.get("kind", "harmonic")
        if kind == "harmonic":
            return ModuliSchedule.harmonic()
        if kind == "adversarial":
            return ModuliSchedule.adversarial()
        if kind != "custom":
            raise ConfigurationError(f"Unknown schedule kind '{kind}'")
        missing = [key for key in ("lambda", "alpha", "gamma", "theta") if key not in spec]
        if missing:
            raise ConfigurationError(f"Custom schedule is missing {', '.join(missing)}")
        lam_spec = dict(spec["lambda"])
        lam_kind = lam_spec.pop("kind", "harmonic")
        if lam_kind == "harmonic":
            lam = LambdaRule.harmonic(lam_spec.get("offset", 1))
        else:
            lam = LambdaRule(lam_kind, value=lam_spec.get("value"))
        return ModuliSchedule(
            lam,
            ScheduleService.build_modulus(spec["alpha"], None),
            ScheduleService.build_modulus(spec["gamma"], None),
            ScheduleService.build_theta(spec["theta"]),
            name=spec.get("name", "custom"),
        )
