"""Rate service - closed-form rate functionals in exact counter arithmetic.

Every ceiling whose argument passed through floating point is checked
against the guard band (see ``halpern_rates.utils.numeric``).
"""
import logging
import math
from fractions import Fraction

from halpern_rates.errors import ContractViolationError, DomainError
from halpern_rates.models.bigcount import BigCount, TinyReal
from halpern_rates.models.curvature import Curvature
from halpern_rates.services.schedule_service import cos_data
from halpern_rates.utils.numeric import ceil_ln, ceil_rational, to_rational

logger = logging.getLogger(__name__)


def as_curvature(kappa):
    return kappa if isinstance(kappa, Curvature) else Curvature(kappa)


def clamped_ln(x, label):
    """max(ceil(ln x), 1) for a positive rational x."""
    return max(ceil_ln(x, label=label), 1)


def _positive(value, name):
    value = to_rational(value)
    if value <= 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


class RateService:
    """Service for the explicit rates of asymptotic regularity and metastability."""

    @staticmethod
    def phi_tilde(eps, kappa, M, gamma, theta):
        """Rate for d(x_n, x_{n+1}) -> 0.

        theta(ceil(1/cos(M sqrt(kappa))) (gamma(eps/2M) + max(ceil(ln(2M/eps)), 1)))
        """
        eps = _positive(eps, "eps")
        M = _positive(M, "M")
        _, _, ceilc = cos_data(M, as_curvature(kappa))
        inner = gamma(eps / (2 * M)) + clamped_ln(2 * M / eps, "ln(2M/eps)")
        return theta(inner * ceilc)

    @staticmethod
    def phi(eps, kappa, M, gamma, theta, alpha):
        """Rate for d(x_n, T x_n) -> 0: max(phi~(eps/2), alpha(eps/2M))."""
        eps = _positive(eps, "eps")
        M = _positive(M, "M")
        return max(
            RateService.phi_tilde(eps / 2, kappa, M, gamma, theta),
            alpha(eps / (2 * M)),
        )

    @staticmethod
    def psi_harmonic(eps, kappa, M, digit_budget=None):
        """4^(ceil(1/cos(M sqrt(kappa))) ceil(8M/eps + 2)) for lambda_n = 1/(n+1)."""
        eps = _positive(eps, "eps")
        M = _positive(M, "M")
        _, _, ceilc = cos_data(M, as_curvature(kappa))
        exponent = ceilc * ceil_rational(8 * M / eps + 2, label="8M/eps+2", inexact=False)
        if digit_budget is None:
            from halpern_rates import current_runtime

            digit_budget = current_runtime().config["DIGIT_BUDGET"]
        return BigCount.power(4, exponent, digit_budget)

    @staticmethod
    def sigma_sequence_lemma(eps, P, gamma, theta):
        """Index after which a_n <= eps for sequences bounded by P.

        theta(gamma(eps/2) + max(ceil(ln(2P/eps)), 1)) + 1
        """
        eps = _positive(eps, "eps")
        P = _positive(P, "P")
        return theta(gamma(eps / 2) + clamped_ln(2 * P / eps, "ln(2P/eps)")) + 1

    @staticmethod
    def limsup_rate(eps, kappa, M, t, gamma, theta, alpha):
        """Rate for limsup gamma_n^t <= 0.

        With L = cos(M sqrt(kappa)) t eps / (4 M sqrt(kappa)) the value is
        max(theta(ceil(1/cos(M sqrt(kappa))) (gamma(L) + max(ceil(ln(1/L)), 1))), alpha(2L)).
        """
        eps = _positive(eps, "eps")
        M = _positive(M, "M")
        t = to_rational(t)
        if not 0 < t < 1:
            raise DomainError(f"t = {t} outside (0, 1)")
        curvature = as_curvature(kappa)
        _, cos_frac, ceilc = cos_data(M, curvature)
        sqrtk = to_rational(curvature.sqrt_kappa)
        L = cos_frac * t * eps / (4 * M * sqrtk)
        inner = gamma(L, inexact=True) + clamped_ln(1 / L, "ln(1/L)")
        return max(theta(inner * ceilc), alpha(2 * L, inexact=True))

    @staticmethod
    def limsup_rate_via_phi(eps, kappa, M, t, gamma, theta, alpha):
        """The same rate written as phi(cos(M sqrt(kappa)) t eps / sqrt(kappa))."""
        curvature = as_curvature(kappa)
        _, cos_frac, _ = cos_data(M, curvature)
        sqrtk = to_rational(curvature.sqrt_kappa)
        scaled = cos_frac * to_rational(t) * to_rational(eps) / sqrtk
        return RateService.phi(scaled, kappa, M, gamma, theta, alpha)

    @staticmethod
    def browder_K_exponent(eps, M, kappa):
        """ceil(M sqrt(kappa) tan(M sqrt(kappa)) / (1 - cos eps)), eps in (0, 1)."""
        eps_f = float(eps)
        if not 0.0 < eps_f < 1.0:
            raise DomainError(f"eps = {eps_f} outside (0, 1)")
        k, _, _ = cos_data(M, as_curvature(kappa))
        ratio = k * math.tan(k) / (1.0 - math.cos(eps_f))
        return ceil_rational(ratio, label="Browder exponent")

    @staticmethod
    def browder_K(eps, g, M, kappa, digit_budget=None):
        """K(eps, g, M) = g~ iterated browder_K_exponent times from 0."""
        exponent = RateService.browder_K_exponent(eps, M, kappa)
        return RateService.iterate_g_tilde(g, exponent, digit_budget=digit_budget)

    @staticmethod
    def iterate_g_tilde(g, count, digit_budget=None):
        return g.iterate_tilde(count, digit_budget=digit_budget)

    @staticmethod
    def aoyama_theta_delta(eps, L, theta, psi, g):
        """(Theta, Delta) for sequences s_{n+1} <= (1 - a_n) s_n + a_n t_n + Delta.

        Theta = theta(psi(eps/3) - 1 + max(ceil(ln(3L/eps)), 1)) + 1 and
        Delta = eps / (3 (Theta - psi(eps/3) + g(Theta))).
        """
        eps = to_rational(eps)
        if not 0 < eps < 2:
            raise DomainError(f"eps = {eps} outside (0, 2)")
        L = _positive(L, "L")
        psi3 = psi(eps / 3)
        Theta = theta(psi3 - 1 + clamped_ln(3 * L / eps, "ln(3L/eps)")) + 1
        denominator = Theta - psi3 + g(Theta)
        if denominator.is_zero():
            raise ContractViolationError("Delta denominator vanished")
        if denominator.is_exact:
            Delta = eps / (3 * denominator.value)
        else:
            Delta = TinyReal(denominator).scaled(eps / 3)
        return Theta, Delta

    @staticmethod
    def h_delta(delta, M, kappa):
        """sin(d/2)(sin(d/2) + 2 sin(k/2)) + sin(d k/2)(sin(d k/2) + 2), k = M sqrt(kappa)."""
        delta = float(delta)
        if not 0.0 < delta < 1.0:
            raise DomainError(f"delta = {delta} outside (0, 1)")
        k, _, _ = cos_data(M, as_curvature(kappa))
        a = math.sin(delta / 2)
        b = math.sin(delta * k / 2)
        return a * (a + 2 * math.sin(k / 2)) + b * (b + 2)

    @staticmethod
    def epsilon_zero(eps, M, kappa):
        """cos(M sqrt(kappa))/36 sin^2(eps sqrt(kappa)/4)."""
        curvature = as_curvature(kappa)
        k, _, _ = cos_data(M, curvature)
        return math.cos(k) / 36 * math.sin(float(eps) * curvature.sqrt_kappa / 4) ** 2

    @staticmethod
    def proof_constants(eps, kappa, M):
        """eps0, h(eps0) and the bound cos(k)/6 sin^2(eps sqrt(kappa)/4) it must respect."""
        eps_f = float(eps)
        if not 0.0 < eps_f < 2.0:
            raise DomainError(f"eps = {eps_f} outside (0, 2)")
        curvature = as_curvature(kappa)
        k, _, _ = cos_data(M, curvature)
        energy = math.sin(eps_f * curvature.sqrt_kappa / 4) ** 2
        eps0 = math.cos(k) / 36 * energy
        h = RateService.h_delta(eps0, M, curvature)
        bound = math.cos(k) / 6 * energy
        return {"eps0": eps0, "h_eps0": h, "bound": bound, "holds": h <= bound}

    @staticmethod
    def delta_fraction(delta):
        """Render Delta for reports."""
        if isinstance(delta, Fraction):
            return {"value": float(delta), "exact": f"{delta.numerator}/{delta.denominator}"}
        return {"value": None, "estimate": True, "reciprocal": delta.reciprocal.to_dict()}
