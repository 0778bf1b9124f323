"""Counterexample functions g: N -> N for metastability statements."""
import logging
from fractions import Fraction

from halpern_rates.errors import ConfigurationError, DomainError
from halpern_rates.models.bigcount import BigCount

logger = logging.getLogger(__name__)


class GFunction:
    """g(n) as constant(c), affine(a, b) = a n + b, or table(values, default).

    Tables are indexed from n = 0; ``default`` applies beyond the table.
    """

    KINDS = ("constant", "affine", "table")

    def __init__(self, kind="constant", c=0, a=0, b=0, values=None, default=0):
        if kind not in self.KINDS:
            raise ConfigurationError(f"Unknown g kind '{kind}'")
        self.kind = kind
        self.c = int(c)
        self.a = int(a)
        self.b = int(b)
        self.values = [int(v) for v in (values or [])]
        self.default = int(default)
        if min([self.c, self.a, self.b, self.default] + self.values) < 0:
            raise ConfigurationError("g must take nonnegative integer values")

    @classmethod
    def constant(cls, c):
        return cls("constant", c=c)

    @classmethod
    def affine(cls, a, b):
        return cls("affine", a=a, b=b)

    @classmethod
    def table(cls, values, default=0):
        return cls("table", values=values, default=default)

    @classmethod
    def from_spec(cls, spec):
        spec = dict(spec or {})
        kind = spec.pop("kind", "constant")
        try:
            return cls(kind, **spec)
        except TypeError as exc:
            raise ConfigurationError(f"Invalid g specification: {exc}") from exc

    @property
    def is_zero(self):
        if self.kind == "constant":
            return self.c == 0
        if self.kind == "affine":
            return self.a == 0 and self.b == 0
        return self.default == 0 and not any(self.values)

    def __call__(self, n):
        if isinstance(n, BigCount):
            if n.is_exact:
                return BigCount(self(n.value))
            if self.kind == "constant":
                return BigCount(self.c)
            if self.kind == "affine":
                return n * self.a + self.b
            return BigCount(self.default)
        if n < 0:
            raise DomainError(f"g is defined on N, got {n}")
        if self.kind == "constant":
            return self.c
        if self.kind == "affine":
            return self.a * n + self.b
        return self.values[n] if n < len(self.values) else self.default

    def tilde(self, n):
        """g~(n) = n + g(n)."""
        return n + self(n)

    def iterate_tilde(self, count, digit_budget=None, step_budget=None):
        """g~ iterated ``count`` times from 0.

        Constant and affine g use closed forms; tables are walked until the
        orbit leaves the table or hits a fixed point, after which the
        default applies in closed form.
        """
        if digit_budget is None or step_budget is None:
            from halpern_rates import current_runtime

            config = current_runtime().config
            digit_budget = config["DIGIT_BUDGET"] if digit_budget is None else digit_budget
            step_budget = config["BROWDER_ITERATION_BUDGET"] if step_budget is None else step_budget
        count = BigCount.coerce(count)
        if count.is_zero():
            return BigCount(0)
        if self.kind == "constant":
            return count * self.c
        if self.kind == "affine":
            if self.b == 0:
                return BigCount(0)
            if self.a == 0:
                return count * self.b
            p = BigCount.power(1 + self.a, count, digit_budget)
            if p.is_exact:
                return BigCount(self.b * (p.value - 1) // self.a)
            logger.warning(f"g~ iterate downgraded to log-estimate ({p})")
            return p.ceil_mul(Fraction(self.b, self.a), label="affine g~ iterate")
        if not count.is_exact:
            return BigCount.as_estimate(BigCount(max(self.values + [self.default])) * count)
        remaining = count.value
        n = 0
        steps = 0
        while remaining and n < len(self.values):
            step = self.values[n]
            if step == 0:
                return BigCount(n)
            n += step
            remaining -= 1
            steps += 1
            if steps > step_budget:
                bound = max(self.values + [self.default])
                logger.warning(f"g~ walk exceeded {step_budget} steps; bounding the rest")
                return BigCount.as_estimate(BigCount(n + remaining * bound))
        if self.default == 0:
            return BigCount(n)
        return BigCount(n + remaining * self.default)

    def __repr__(self):
        return f"<GFunction {self.to_dict()}>"

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind == "affine":
            return {"kind": "affine", "a": self.a, "b": self.b}
        return {"kind": "table", "values": self.values, "default": self.default}
