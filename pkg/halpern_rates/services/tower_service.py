"""Tower service - the full metastability rate tower and its reference evaluator.

Quantities are indexed by i (the Browder index) and evaluated at
E = sin^2(eps sqrt(kappa)/4). Per-index values are cached, so the orbit of
f~* and the reported intermediates share work.
"""
import logging
import math
from fractions import Fraction

from halpern_rates import current_runtime
from halpern_rates.errors import DomainError
from halpern_rates.models.bigcount import BigCount, TinyReal
from halpern_rates.models.reports import RateTowerReport
from halpern_rates.models.schedule import EpsilonModulus, ThetaRule
from halpern_rates.services.rate_service import RateService, as_curvature
from halpern_rates.services.schedule_service import cos_data
from halpern_rates.utils.numeric import ceil_ln, ceil_rational, guard_band_ledger, to_rational

logger = logging.getLogger(__name__)


class TowerEvaluator:
    """Evaluates the tower functionals for fixed (eps, g, kappa, M) and moduli."""

    def __init__(self, eps, g, kappa, M, theta, alpha, gamma, digit_budget=None):
        self.eps = to_rational(eps)
        if not 0 < self.eps < 2:
            raise DomainError(f"eps = {self.eps} outside (0, 2)")
        self.M = to_rational(M)
        self.curvature = as_curvature(kappa)
        self.g = g
        self.theta_rule = theta
        self.alpha = alpha
        self.gamma = gamma
        config = current_runtime().config
        self.digit_budget = config["DIGIT_BUDGET"] if digit_budget is None else digit_budget
        self.gamma_cap = int(config["GAMMA_ENUMERATION_CAP"])

        self.k, self.cos_frac, self.ceilc = cos_data(self.M, self.curvature)
        self.k_frac = to_rational(self.k)
        self.E_float = math.sin(float(self.eps) * self.curvature.sqrt_kappa / 4) ** 2
        self.E = to_rational(self.E_float)
        self.eps0 = math.cos(self.k) / 36 * self.E_float
        self.c0 = ceil_rational(1 / to_rational(self.eps0), label="1/eps0")
        self.B = ceil_rational(
            self.k * math.tan(self.k) / (2 * math.sin(self.eps0 / 2) ** 2), label="B"
        )
        self.sin2_half = to_rational(math.sin(self.k / 2) ** 2)
        self.S = self.T(self.E)
        # S with sin^2(M sqrt(kappa)/4) in place of sin^2(M sqrt(kappa)/2); reported only
        self.S_quarter = ceil_ln(
            3 * to_rational(math.sin(self.k / 4) ** 2) / self.E, label="S quarter angle"
        )
        self.gamma_bounded = False
        self._chi_cache = {}
        self._theta_cache = {}

    # Moduli

    def theta(self, n):
        return self.theta_rule(n)

    def theta_plus(self, n):
        return self.theta_rule.running_max(n)

    # Scalars

    def T(self, e):
        """ceil(ln(3 sin^2(k/2) / e)); may be nonpositive."""
        return ceil_ln(3 * self.sin2_half / to_rational(e), label="T")

    def L(self, i, e):
        """cos(k) e / (4 k (i + 1))."""
        factor = self.cos_frac * to_rational(e) / (4 * self.k_frac)
        i = BigCount.coerce(i)
        if i.is_exact:
            return factor / (i.value + 1)
        return TinyReal(i + 1).scaled(factor)

    @staticmethod
    def _ln_inverse(L):
        if isinstance(L, TinyReal):
            return max(L.reciprocal.ceil_ln(label="ln(1/L)"), BigCount(1))
        return BigCount(max(ceil_ln(1 / L, label="ln(1/L)"), 1))

    @staticmethod
    def _double(L):
        return L.scaled(2) if isinstance(L, TinyReal) else 2 * L

    def _chi_inner(self, i, e):
        L = self.L(i, e)
        return self.gamma(L, inexact=True) + self._ln_inverse(L), L

    # Indexed functionals

    def chi(self, i, e):
        """The limsup rate at t = 1/(i+1) and tolerance e."""
        inner, L = self._chi_inner(i, e)
        return max(self.theta(inner * self.ceilc), self.alpha(self._double(L), inexact=True))

    def chi_star(self, i, e):
        """chi_i(e cos(k) / 2)."""
        key = (BigCount.coerce(i), to_rational(e))
        if key not in self._chi_cache:
            self._chi_cache[key] = self.chi(i, key[1] * self.cos_frac / 2)
        return self._chi_cache[key]

    def Theta(self, i, e):
        key = (BigCount.coerce(i), to_rational(e))
        if key not in self._theta_cache:
            arg = (self.chi_star(i, key[1] / 3) - 1 + max(self.T(key[1]), 1)) * self.ceilc
            self._theta_cache[key] = self.theta(arg) + 1
        return self._theta_cache[key]

    def D(self, i):
        """3 (Theta_i(E) - chi*_i(E/3) + g(Theta_i(E))), the denominator of Delta*_i."""
        theta_i = self.Theta(i, self.E)
        return (theta_i - self.chi_star(i, self.E / 3) + self.g(theta_i)) * 3

    def Delta_star(self, i):
        d = self.D(i)
        if d.is_exact:
            return self.E / d.value
        return TinyReal(d).scaled(self.E)

    def f(self, i):
        """max(ceil(k / Delta*_i) - i, 0)."""
        d = self.D(i)
        if d.is_exact:
            bound = BigCount(ceil_rational(self.k_frac * d.value / self.E, label="k/Delta*"))
        else:
            bound = d.ceil_mul(self.k_frac / self.E, label="k/Delta*")
        return bound - i

    def f_star(self, i):
        return self.f(BigCount.coerce(i) + self.c0) + self.c0

    def f_tilde_star(self, i):
        return BigCount.coerce(i) + self.f_star(i)

    def Gamma(self, n):
        """max of chi*_i(E/3) over c0 <= i <= n."""
        n = BigCount.coerce(n)
        if n < self.c0:
            raise DomainError(f"Gamma is defined from index {self.c0}, got {n}")
        e = self.E / 3
        if self.theta_rule.monotone:
            return self.chi_star(n, e)
        if n.is_exact and n.value - self.c0 <= self.gamma_cap:
            return max(self.chi_star(i, e) for i in range(self.c0, n.value + 1))
        # every modulus argument is largest at i = n, so theta+ there bounds the max
        self.gamma_bounded = True
        logger.warning(f"Gamma({n}) replaced by its theta+ upper bound")
        inner, L = self._chi_inner(n, e * self.cos_frac / 2)
        return max(self.theta_plus(inner * self.ceilc), self.alpha(self._double(L), inexact=True))

    def A_argument(self, n):
        return (self.Gamma(n) - 1 + max(self.S, 1)) * self.ceilc

    def A(self, n):
        return self.theta_plus(self.A_argument(n)) + 1

    # Orbit

    def orbit(self, budget=None):
        """(f~*^B(0), retained orbit points, extrapolated flag)."""
        if budget is None:
            budget = int(current_runtime().config["TOWER_ITERATION_BUDGET"])
        steps = min(self.B, budget)
        x = BigCount(0)
        points = [x]
        for _ in range(steps):
            x = self.f_tilde_star(x)
            points.append(x)
        if steps == self.B:
            return x, points, False
        prev = points[-2]
        remaining = self.B - steps
        logger.warning(f"Orbit of length {self.B} exceeds the budget {budget}; extrapolating")
        if x.height == 0 and prev.height == 0:
            x = BigCount.as_estimate(x + (x - prev) * remaining)
        else:
            growth = max(x.height - prev.height, 0)
            x = BigCount.estimate(x.height + growth * remaining, x.top)
        return x, points, True


class HarmonicTower(TowerEvaluator):
    """Closed exponential forms for lambda_n = 1/(n+1)."""

    def __init__(self, eps, g, kappa, M, digit_budget=None):
        super().__init__(
            eps,
            g,
            kappa,
            M,
            ThetaRule.power(4, 1, digit_budget=digit_budget),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
            digit_budget=digit_budget,
        )

    def _pow4(self, exponent):
        return BigCount.power(4, exponent, self.digit_budget)

    def chi(self, i, e):
        L = self.L(i, e)
        if isinstance(L, TinyReal):
            ceil_inverse = L.reciprocal.ceil_mul(1, label="modulus")
        else:
            ceil_inverse = BigCount(ceil_rational(1 / L, label="modulus"))
        return self._pow4((ceil_inverse + self._ln_inverse(L)) * self.ceilc + 1)

    def Theta(self, i, e):
        key = (BigCount.coerce(i), to_rational(e))
        if key not in self._theta_cache:
            arg = (self.chi_star(i, key[1] / 3) - 1 + max(self.T(key[1]), 1)) * self.ceilc
            self._theta_cache[key] = self._pow4(arg + 1) + 1
        return self._theta_cache[key]

    def Gamma(self, n):
        n = BigCount.coerce(n)
        if n < self.c0:
            raise DomainError(f"Gamma is defined from index {self.c0}, got {n}")
        return self.chi_star(n, self.E / 3)

    def A(self, n):
        return self._pow4(self.A_argument(n) + 1) + 1


def _delta_value(delta):
    if isinstance(delta, Fraction):
        return delta
    return RateService.delta_fraction(delta)


class TowerService:
    """Service for the metastability tower."""

    @staticmethod
    def evaluate(evaluator):
        """Run the tower and collect a RateTowerReport."""
        config = current_runtime().config
        limit = int(config["REPORT_ORBIT_LIMIT"])
        with guard_band_ledger() as ledger:
            ev = evaluator
            end, points, extrapolated = ev.orbit()
            top = end + ev.c0
            sigma = ev.A(top)
            a_argument = ev.A_argument(top)
            c0 = ev.c0
            values = {
                "E": ev.E_float,
                "ε₀": ev.eps0,
                "c0": c0,
                "B": ev.B,
                "S": ev.S,
                "S_quarter": ev.S_quarter,
                "T": ev.T(ev.E),
                "L": ev.L(c0, ev.E),
                "χ": ev.chi(c0, ev.E),
                "χ*": ev.chi_star(c0, ev.E / 3),
                "Θ": ev.Theta(c0, ev.E),
                "Δ*": _delta_value(ev.Delta_star(c0)),
                "f": ev.f(c0),
                "f*": ev.f_star(0),
                "f̃*": ev.f_tilde_star(0),
                "Γ": ev.Gamma(top),
                "θ⁺": ev.theta_plus(a_argument),
                "A": sigma,
                "Σ": sigma,
            }
            if len(points) > limit:
                half = limit // 2
                shown = points[:half] + points[-half:]
            else:
                shown = points
            candidates = [
                {"K0": point + c0, "N": ev.Theta(point + c0, ev.E)} for point in shown[:8]
            ]
        if sigma.is_estimate:
            logger.warning(f"Metastability bound is a log-estimate: {sigma}")
        report = RateTowerReport(
            eps=ev.eps,
            kappa=ev.curvature.kappa,
            M=ev.M,
            g=ev.g,
            values=values,
            orbit=shown,
            orbit_length=ev.B,
            k0_range=[c0, top],
            n_candidates=candidates,
            sigma=sigma,
            flags={
                "estimate": sigma.is_estimate,
                "gamma_bound": ev.gamma_bounded,
                "height_extrapolated": extrapolated,
                "S_quarter_differs": ev.S != ev.S_quarter,
            },
            guard_band_hits=ledger.to_list(),
            evaluator=ev,
        )
        return report

    @staticmethod
    def table1_tower(eps, g, kappa, M, theta, alpha, gamma, digit_budget=None):
        """Full tower for arbitrary moduli.

        Args:
            eps: tolerance in (0, 2)
            g: GFunction
            kappa: curvature (float or Curvature)
            M: diameter bound
            theta: ThetaRule
            alpha: EpsilonModulus
            gamma: EpsilonModulus
            digit_budget: decimal digits allowed before log-estimates

        Returns:
            RateTowerReport whose Σ bounds the metastability index
        """
        evaluator = TowerEvaluator(eps, g, kappa, M, theta, alpha, gamma, digit_budget)
        return TowerService.evaluate(evaluator)

    @staticmethod
    def sigma_harmonic(eps, g, kappa, M, digit_budget=None):
        """Tower for lambda_n = 1/(n+1) through the closed exponential forms."""
        return TowerService.evaluate(HarmonicTower(eps, g, kappa, M, digit_budget))

    @staticmethod
    def reference_tower(eps, g, kappa, M, theta, alpha, gamma):
        """Naive evaluation with plain ints and Fractions.

        ``theta`` maps int -> int, ``alpha`` and ``gamma`` map Fraction -> int.
        Every max is enumerated and the orbit is iterated step by step, so
        this is only usable on toy configurations.
        """
        eps = Fraction(str(eps))
        M = Fraction(str(M))
        k = float(M) * math.sqrt(kappa)
        cos_frac = Fraction(repr(math.cos(k)))
        k_frac = Fraction(repr(k))
        ceilc = math.ceil(1 / cos_frac)
        E_float = math.sin(float(eps) * math.sqrt(kappa) / 4) ** 2
        E = Fraction(repr(E_float))
        eps0 = math.cos(k) / 36 * E_float
        c0 = math.ceil(1 / Fraction(repr(eps0)))
        B = math.ceil(Fraction(repr(k * math.tan(k) / (2 * math.sin(eps0 / 2) ** 2))))
        sin2_half = Fraction(repr(math.sin(k / 2) ** 2))

        def ln_ceil(q):
            return 0 if q == 1 else math.ceil(math.log(float(q)))

        def T(e):
            return ln_ceil(3 * sin2_half / e)

        def chi(i, e):
            L = cos_frac * e / (4 * k_frac * (i + 1))
            return max(theta(ceilc * (gamma(L) + max(ln_ceil(1 / L), 1))), alpha(2 * L))

        def chi_star(i, e):
            return chi(i, e * cos_frac / 2)

        def Theta(i, e):
            return theta(ceilc * (chi_star(i, e / 3) - 1 + max(T(e), 1))) + 1

        def f(i):
            theta_i = Theta(i, E)
            d = 3 * (theta_i - chi_star(i, E / 3) + g(theta_i))
            return max(math.ceil(k_frac * d / E) - i, 0)

        def f_tilde_star(i):
            return i + f(i + c0) + c0

        x = 0
        for _ in range(B):
            x = f_tilde_star(x)
        S = T(E)

        def Gamma(n):
            return max(chi_star(i, E / 3) for i in range(c0, n + 1))

        def theta_plus(n):
            return max(theta(i) for i in range(1, n + 1))

        sigma = theta_plus(ceilc * (Gamma(x + c0) - 1 + max(S, 1))) + 1
        return {
            "c0": c0,
            "B": B,
            "S": S,
            "χ*": chi_star(c0, E / 3),
            "Θ": Theta(c0, E),
            "f": f(c0),
            "orbit_end": x,
            "Σ": sigma,
        }
