"""Step-size schedules and their quantitative moduli."""
from fractions import Fraction

import numpy as np

from halpern_rates.errors import ConfigurationError, DomainError
from halpern_rates.models.bigcount import BigCount, TinyReal
from halpern_rates.utils.numeric import ceil_rational, to_rational


def _digit_budget(explicit):
    if explicit is not None:
        return explicit
    from halpern_rates import current_runtime

    return int(current_runtime().config["DIGIT_BUDGET"])


class LambdaRule:
    """The sequence lambda_n, n >= 1."""

    KINDS = ("harmonic", "constant")

    def __init__(self, kind="harmonic", offset=1, value=None):
        if kind not in self.KINDS:
            raise ConfigurationError(f"Unknown lambda kind '{kind}'")
        self.kind = kind
        self.offset = int(offset)
        if kind == "harmonic" and self.offset < 1:
            raise ConfigurationError("Harmonic offset must be at least 1")
        self.value = None
        if kind == "constant":
            self.value = to_rational(1 if value is None else value)
            if not 0 <= self.value <= 1:
                raise ConfigurationError(f"Constant lambda {self.value} outside [0, 1]")

    @classmethod
    def harmonic(cls, offset=1):
        return cls("harmonic", offset=offset)

    @classmethod
    def constant(cls, value):
        return cls("constant", value=value)

    def __call__(self, n):
        if n < 1:
            raise DomainError(f"lambda is indexed from 1, got {n}")
        if self.kind == "harmonic":
            return Fraction(1, n + self.offset)
        return self.value

    def values(self, start, stop):
        """Float array of lambda_n for start <= n < stop."""
        if start < 1:
            raise DomainError(f"lambda is indexed from 1, got {start}")
        if self.kind == "harmonic":
            return 1.0 / (np.arange(start, stop, dtype=float) + self.offset)
        return np.full(max(stop - start, 0), float(self.value))

    def to_dict(self):
        if self.kind == "harmonic":
            return {"kind": "harmonic", "offset": self.offset}
        return {"kind": "constant", "value": str(self.value)}


class EpsilonModulus:
    """A modulus eps -> positive integer (alpha, gamma or psi)."""

    KINDS = ("reciprocal", "constant")

    def __init__(self, kind="reciprocal", scale=1, value=1):
        if kind not in self.KINDS:
            raise ConfigurationError(f"Unknown modulus kind '{kind}'")
        self.kind = kind
        self.scale = to_rational(scale)
        self.value = int(value)
        if self.scale <= 0 or self.value < 1:
            raise ConfigurationError("Modulus parameters must be positive")

    @classmethod
    def reciprocal(cls, scale=1):
        """eps -> ceil(scale / eps)."""
        return cls("reciprocal", scale=scale)

    @classmethod
    def constant(cls, value):
        return cls("constant", value=value)

    def __call__(self, eps, inexact=False):
        if self.kind == "constant":
            return BigCount(self.value)
        if isinstance(eps, TinyReal):
            return eps.reciprocal.ceil_mul(self.scale, label="modulus")
        eps = to_rational(eps)
        if eps <= 0:
            raise DomainError(f"Modulus argument must be positive, got {eps}")
        return BigCount(ceil_rational(self.scale / eps, label="modulus", inexact=inexact))

    @property
    def monotone(self):
        return True

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": "reciprocal", "scale": str(self.scale)}


class ThetaRule:
    """Rate of divergence n -> positive integer, valued in BigCount."""

    KINDS = ("power", "linear", "identity", "table")

    def __init__(self, kind="power", base=4, shift=1, a=1, b=0, values=None,
                 default=1, digit_budget=None):
        if kind not in self.KINDS:
            raise ConfigurationError(f"Unknown theta kind '{kind}'")
        self.kind = kind
        self.base = int(base)
        self.shift = int(shift)
        self.a = int(a)
        self.b = int(b)
        self.values = [int(v) for v in (values or [])]
        self.default = int(default)
        self.digit_budget = digit_budget
        if kind == "power" and (self.base < 2 or self.shift < 0):
            raise ConfigurationError("Power theta needs base >= 2 and shift >= 0")
        if kind == "linear" and (self.a < 0 or self.a + self.b < 1):
            raise ConfigurationError("Linear theta needs a >= 0 and a + b >= 1")
        if kind == "table" and (not self.values or min(self.values + [self.default]) < 1):
            raise ConfigurationError("Table theta needs positive values")

    @classmethod
    def power(cls, base=4, shift=1, digit_budget=None):
        """n -> base^(n + shift)."""
        return cls("power", base=base, shift=shift, digit_budget=digit_budget)

    @classmethod
    def linear(cls, a, b=0):
        return cls("linear", a=a, b=b)

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def table(cls, values, default=None):
        values = list(values)
        return cls("table", values=values, default=values[-1] if default is None else default)

    @property
    def monotone(self):
        if self.kind != "table":
            return True
        seq = self.values + [self.default]
        return all(p <= q for p, q in zip(seq, seq[1:]))

    def __call__(self, n):
        n = BigCount.coerce(n)
        if n < 1:
            raise DomainError(f"theta is indexed from 1, got {n}")
        if self.kind == "power":
            return BigCount.power(self.base, n + self.shift, _digit_budget(self.digit_budget))
        if self.kind == "linear":
            return n * self.a + self.b
        if self.kind == "identity":
            return n
        if n.is_exact and n.value <= len(self.values):
            return BigCount(self.values[n.value - 1])
        return BigCount(self.default)

    def running_max(self, n):
        """theta+(n) = max over 1 <= i <= n of theta(i)."""
        if self.monotone:
            return self(n)
        n = BigCount.coerce(n)
        if n < 1:
            raise DomainError(f"theta is indexed from 1, got {n}")
        if n.is_exact and n.value <= len(self.values):
            return BigCount(max(self.values[: n.value]))
        return BigCount(max(max(self.values), self.default))

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "base": self.base, "shift": self.shift}
        if self.kind == "linear":
            return {"kind": "linear", "a": self.a, "b": self.b}
        if self.kind == "table":
            return {"kind": "table", "values": self.values, "default": self.default}
        return {"kind": "identity"}


class ModuliSchedule:
    """The sequence (lambda_n) with its moduli alpha, gamma and theta."""

    def __init__(self, lam, alpha, gamma, theta, name="custom"):
        self.lam_rule = lam
        self.alpha_modulus = alpha
        self.gamma_modulus = gamma
        self.theta_rule = theta
        self.name = name

    @classmethod
    def harmonic(cls, digit_budget=None):
        """lambda_n = 1/(n+1), alpha = gamma = ceil(1/eps), theta(n) = 4^(n+1)."""
        return cls(
            LambdaRule.harmonic(1),
            EpsilonModulus.reciprocal(1),
            EpsilonModulus.reciprocal(1),
            ThetaRule.power(4, 1, digit_budget=digit_budget),
            name="harmonic",
        )

    @classmethod
    def adversarial(cls):
        """lambda_n = 1 with theta(n) = n; the alpha clause fails for eps < 1."""
        return cls(
            LambdaRule.constant(1),
            EpsilonModulus.constant(1),
            EpsilonModulus.constant(1),
            ThetaRule.identity(),
            name="adversarial",
        )

    def lam(self, n):
        return self.lam_rule(n)

    def lam_float(self, n):
        return float(self.lam_rule(n))

    def values(self, start, stop):
        return self.lam_rule.values(start, stop)

    def alpha(self, eps, inexact=False):
        return self.alpha_modulus(eps, inexact=inexact)

    def gamma(self, eps, inexact=False):
        return self.gamma_modulus(eps, inexact=inexact)

    def theta(self, n):
        return self.theta_rule(n)

    def theta_plus(self, n):
        return self.theta_rule.running_max(n)

    @property
    def monotone(self):
        return self.theta_rule.monotone

    @property
    def is_harmonic(self):
        return (
            self.lam_rule.kind == "harmonic"
            and self.lam_rule.offset == 1
            and self.alpha_modulus.to_dict() == {"kind": "reciprocal", "scale": "1"}
            and self.gamma_modulus.to_dict() == {"kind": "reciprocal", "scale": "1"}
            and self.theta_rule.to_dict() == {"kind": "power", "base": 4, "shift": 1}
        )

    def __repr__(self):
        return f"<ModuliSchedule {self.name}>"

    def to_dict(self):
        return {
            "name": self.name,
            "lambda": self.lam_rule.to_dict(),
            "alpha": self.alpha_modulus.to_dict(),
            "gamma": self.gamma_modulus.to_dict(),
            "theta": self.theta_rule.to_dict(),
            "monotone": self.monotone,
        }
