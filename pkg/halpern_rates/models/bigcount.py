"""Arbitrary-precision counts with a logarithmic estimate mode.

An exact count is a Python integer. When exact evaluation would exceed the
digit budget the count becomes an estimate stored as a small power tower:
``height`` twos stacked under a float ``top``, i.e. ``2^2^...^top``. A tower
is kept canonical: ``top <= 2**1000`` always, and ``top > 1000`` whenever
``height >= 1``, so two canonical towers compare lexicographically by
``(height, top)``.

Estimates also carry nonnegative reals (logarithms of counts), which is what
the rate tower needs when it tracks ``log2`` through exponentials.
"""
import math
from functools import total_ordering

from halpern_rates.errors import UnsupportedAnalysisError
from halpern_rates.utils.numeric import ceil_rational, ceil_ln, to_rational

_PROMOTE = 2.0 ** 1000
_DEMOTE = 1000.0
_FLOAT_BITS = 1000
_LOG2_10 = math.log2(10)
_LN2 = math.log(2)


def budget_bits(digit_budget: int) -> int:
    """Largest bit length allowed for an exact count."""
    return int(max(digit_budget, 0) * _LOG2_10)


def _normalize(height: int, top: float):
    if top != top:
        raise ValueError("Estimate top is NaN")
    top = max(top, 0.0)
    if math.isinf(top):
        raise OverflowError("Estimate top overflowed")
    while top > _PROMOTE:
        top = math.log2(top)
        height += 1
    while height > 0 and top <= _DEMOTE:
        top = 2.0 ** top
        height -= 1
    return height, top


@total_ordering
class BigCount:
    """Nonnegative count, exact or log-estimate."""

    __slots__ = ("_value", "_height", "_top")

    def __init__(self, value: int = 0):
        if isinstance(value, BigCount):
            self._value, self._height, self._top = value._value, value._height, value._top
            return
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"BigCount needs an int, got {type(value).__name__}")
        if value < 0:
            raise ValueError(f"BigCount must be nonnegative, got {value}")
        self._value = value
        self._height = 0
        self._top = None

    # Construction

    @classmethod
    def coerce(cls, value) -> "BigCount":
        if isinstance(value, BigCount):
            return value
        return cls(value)

    @classmethod
    def estimate(cls, height: int, top: float) -> "BigCount":
        """Tower estimate ``2^...^top`` with ``height`` twos."""
        count = cls.__new__(cls)
        count._value = None
        count._height, count._top = _normalize(int(height), float(top))
        return count

    @classmethod
    def as_estimate(cls, value) -> "BigCount":
        """Same magnitude, flagged as an estimate."""
        value = cls.coerce(value)
        if value.is_estimate:
            return value
        height, top = value._key()
        return cls.estimate(height, top)

    @classmethod
    def pow2(cls, exponent, digit_budget: int) -> "BigCount":
        """2**exponent, exact while within the digit budget."""
        if isinstance(exponent, BigCount):
            if exponent.is_exact:
                exponent = exponent.value
            else:
                return cls.estimate(exponent._height + 1, exponent._top)
        if isinstance(exponent, int):
            if exponent < 0:
                raise ValueError("Negative exponent")
            if exponent <= budget_bits(digit_budget):
                return cls(1 << exponent)
            if exponent.bit_length() <= _FLOAT_BITS:
                return cls.estimate(1, float(exponent))
            return cls.estimate(2, math.log2(exponent))
        # real-valued exponent, kept as estimate
        return cls.estimate(1, float(exponent))

    @classmethod
    def power(cls, base: int, exponent, digit_budget: int) -> "BigCount":
        """base**exponent for an integer base >= 1."""
        if base < 1:
            raise ValueError("Base must be at least 1")
        if base == 1:
            return cls(1)
        if base & (base - 1) == 0:
            shift = base.bit_length() - 1
            return cls.pow2(cls.coerce(exponent) * shift, digit_budget)
        exponent = cls.coerce(exponent)
        if exponent.is_exact:
            e = exponent.value
            if e * math.log10(base) <= digit_budget:
                return cls(base ** e)
        return cls.pow2(exponent.scaled_log2(math.log2(base)), 0)

    # Inspection

    @property
    def is_exact(self) -> bool:
        return self._value is not None

    @property
    def is_estimate(self) -> bool:
        return self._value is None

    @property
    def mode(self) -> str:
        return "exact" if self.is_exact else "log-estimate"

    @property
    def value(self) -> int:
        if self._value is None:
            raise UnsupportedAnalysisError(f"{self} is a log-estimate and has no exact value")
        return self._value

    @property
    def height(self) -> int:
        return self._key()[0]

    @property
    def top(self) -> float:
        return self._key()[1]

    def _key(self):
        if self._value is not None:
            n = self._value
            if n.bit_length() <= _FLOAT_BITS:
                return 0, float(n)
            return _normalize(1, math.log2(n))
        return self._height, self._top

    def is_zero(self) -> bool:
        return self._value == 0 or (self._value is None and self._height == 0 and self._top == 0.0)

    def log2(self) -> "BigCount":
        """log2 of the magnitude, as an estimate (0 for counts <= 1)."""
        if self._value is not None:
            if self._value <= 1:
                return BigCount.estimate(0, 0.0)
            return BigCount.estimate(0, math.log2(self._value))
        if self._height >= 1:
            return BigCount.estimate(self._height - 1, self._top)
        if self._top <= 1.0:
            return BigCount.estimate(0, 0.0)
        return BigCount.estimate(0, math.log2(self._top))

    def log2_float(self):
        """log2 as a float, or None when it does not fit one."""
        lg = self.log2()
        return lg._top if lg._height == 0 else None

    def digits(self) -> int:
        """Approximate decimal digit count of an exact value."""
        return int(self.value.bit_length() / _LOG2_10) + 1

    # Arithmetic

    def __add__(self, other):
        other = BigCount.coerce(other)
        if self.is_exact and other.is_exact:
            return BigCount(self._value + other._value)
        if self.is_zero():
            return BigCount.as_estimate(other)
        if other.is_zero():
            return BigCount.as_estimate(self)
        hi, lo = (self, other) if self >= other else (other, self)
        h, t = hi._key()
        lh, lt = lo._key()
        if h == 0:
            return BigCount.estimate(0, t + lt)
        if h == 1:
            lb = lt if lh == 1 else (math.log2(lt) if lt > 0 else -math.inf)
            gap = lb - t
            if gap < -1074:
                return BigCount.estimate(1, t)
            return BigCount.estimate(1, t + math.log2(1.0 + 2.0 ** gap))
        return BigCount.estimate(h, t)

    __radd__ = __add__

    def __sub__(self, other):
        """Saturating subtraction (never below zero)."""
        other = BigCount.coerce(other)
        if self.is_exact and other.is_exact:
            return BigCount(max(self._value - other._value, 0))
        if other >= self:
            return BigCount(0)
        if other.is_zero():
            return BigCount.as_estimate(self)
        h, t = self._key()
        lh, lt = other._key()
        if h == 0:
            return BigCount.estimate(0, t - lt)
        if h == 1:
            lb = lt if lh == 1 else (math.log2(lt) if lt > 0 else -math.inf)
            gap = lb - t
            if gap < -1074:
                return BigCount.estimate(1, t)
            return BigCount.estimate(1, t + math.log2(-math.expm1(gap * _LN2)))
        return BigCount.estimate(h, t)

    def __rsub__(self, other):
        return BigCount.coerce(other) - self

    def __mul__(self, other):
        other = BigCount.coerce(other)
        if self.is_exact and other.is_exact:
            return BigCount(self._value * other._value)
        if self.is_zero() or other.is_zero():
            return BigCount(0)
        return BigCount.pow2(self.log2() + other.log2(), 0)

    __rmul__ = __mul__

    def scaled_log2(self, log2_factor: float) -> "BigCount":
        """self * log2_factor for the exponents of ``power``; log2_factor > 0."""
        if self.is_exact and self._value.bit_length() <= _FLOAT_BITS:
            return BigCount.estimate(0, self._value * log2_factor)
        if self.is_zero():
            return BigCount(0)
        return self._shift_log2(math.log2(log2_factor))

    def _shift_log2(self, delta: float) -> "BigCount":
        """Multiply an estimate by 2**delta."""
        h, t = self._key()
        if h == 0:
            return BigCount.estimate(0, t * 2.0 ** delta)
        lg = BigCount.estimate(h - 1, t)
        if delta >= 0:
            lg = lg + BigCount.estimate(0, delta)
        else:
            lg = lg - BigCount.estimate(0, -delta)
        return BigCount.estimate(lg._height + 1, lg._top)

    def ceil_mul(self, factor, label: str = "ceil-mul", inexact: bool = True) -> "BigCount":
        """⌈factor·self⌉ for a positive real factor."""
        factor = to_rational(factor)
        if factor <= 0:
            raise ValueError("Scale factor must be positive")
        if self.is_exact:
            return BigCount(ceil_rational(factor * self._value, label=label, inexact=inexact))
        return self._shift_log2(math.log2(factor))

    def ceil_ln(self, label: str = "ceil-ln") -> "BigCount":
        """⌈ln self⌉ for self >= 1; log-estimates stay estimates."""
        if self.is_exact:
            if self._value < 1:
                raise ValueError("Logarithm of zero")
            return BigCount(max(ceil_ln(self._value, label=label), 0))
        lg = self.log2()
        return lg._shift_log2(math.log2(_LN2))

    # Comparison

    def _cmp(self, other) -> int:
        other = BigCount.coerce(other)
        if self.is_exact and other.is_exact:
            return (self._value > other._value) - (self._value < other._value)
        a, b = self._key(), other._key()
        return (a > b) - (a < b)

    def __eq__(self, other):
        if not isinstance(other, (BigCount, int)) or isinstance(other, bool):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        if not isinstance(other, (BigCount, int)) or isinstance(other, bool):
            return NotImplemented
        return self._cmp(other) < 0

    def __hash__(self):
        if self.is_exact:
            return hash(self._value)
        return hash((self._height, self._top))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    # Rendering

    def __str__(self):
        if self.is_exact:
            return str(self._value)
        h, t = self._height, self._top
        if h == 0:
            return f"~{t:.6g}"
        if h <= 3:
            return "~" + "2^(" * (h - 1) + f"2^{t:.6g}" + ")" * (h - 1)
        return f"~tower(2, height={h}, top={t:.6g})"

    def __repr__(self):
        if self.is_exact:
            text = str(self._value) if self._value.bit_length() <= 256 else f"{self.digits()} digits"
            return f"<BigCount exact {text}>"
        return f"<BigCount log-estimate height={self._height} top={self._top!r}>"

    def to_dict(self):
        """Serializable form; estimates are flagged."""
        if self.is_exact:
            return {"mode": "exact", "value": str(self._value)}
        data = {
            "mode": "log-estimate",
            "estimate": True,
            "height": self._height,
            "top": self._top,
            "value": str(self),
        }
        lg = self.log2_float()
        if lg is not None:
            data["log2"] = lg
        return data


class TinyReal:
    """A positive real too small to hold as a rational, kept as 1/reciprocal."""

    __slots__ = ("reciprocal",)

    def __init__(self, reciprocal: BigCount):
        self.reciprocal = BigCount.coerce(reciprocal)

    def scaled(self, factor) -> "TinyReal":
        """factor·self for a positive real factor."""
        factor = to_rational(factor)
        return TinyReal(self.reciprocal._shift_log2(-math.log2(factor)))

    def __repr__(self):
        return f"<TinyReal 1/{self.reciprocal}>"
