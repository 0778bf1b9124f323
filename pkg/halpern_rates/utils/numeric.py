"""Exact rationals, guarded ceilings and the guard-band ledger.

Ceilings are the places where a rate value can jump, so every ceiling of a
quantity that went through floating point is checked against a guard band:
when the argument sits within ``guard * max(1, |x|)`` of an integer the hit
is logged and recorded in the active ledger.
"""
import logging
import math
from contextlib import contextmanager
from contextvars import ContextVar
from decimal import Decimal
from fractions import Fraction
from typing import List, Optional, Union

logger = logging.getLogger(__name__)

Real = Union[int, float, Fraction]

DEFAULT_GUARD_BAND = 1e-12

_active_ledger = ContextVar("guard_band_ledger", default=None)


class GuardBandLedger:
    """Collects ceilings that landed within the guard band."""

    def __init__(self, guard=DEFAULT_GUARD_BAND):
        self.guard = guard
        self.hits: List[dict] = []

    def record(self, label, value):
        self.hits.append({"label": label, "value": repr(value)})

    def __len__(self):
        return len(self.hits)

    def to_list(self):
        return list(self.hits)


@contextmanager
def guard_band_ledger(guard: Optional[float] = None):
    """Collect guard-band hits raised inside the block."""
    if guard is None:
        from halpern_rates import current_runtime

        guard = current_runtime().config["GUARD_BAND"]
    ledger = GuardBandLedger(guard)
    token = _active_ledger.set(ledger)
    try:
        yield ledger
    finally:
        _active_ledger.reset(token)


def _guard():
    ledger = _active_ledger.get()
    return ledger.guard if ledger is not None else DEFAULT_GUARD_BAND


def to_rational(x) -> Fraction:
    """Convert an input value to an exact rational.

    Floats are read with decimal intent (``0.1`` becomes 1/10), which is what
    a configuration value written as ``0.1`` means.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not real numbers")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"Non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, (str, Decimal)):
        return Fraction(str(x).strip())
    raise TypeError(f"Cannot read {x!r} as a rational")


def ceil_rational(x: Real, label: str = "ceil", inexact: bool = True) -> int:
    """Exact ceiling of ``x``; inexact arguments are guard-band checked."""
    q = to_rational(x)
    result = math.ceil(q)
    if inexact:
        frac = q - math.floor(q)
        distance = min(frac, 1 - frac)
        if distance <= _guard() * max(1, abs(q)):
            logger.warning(f"Ceiling '{label}' within guard band at {float(q)!r}")
            ledger = _active_ledger.get()
            if ledger is not None:
                ledger.record(label, float(q))
    return result


def ln_rational(x: Real) -> float:
    """Natural logarithm of a positive rational of any size."""
    q = to_rational(x)
    if q <= 0:
        raise ValueError(f"Logarithm of nonpositive value {q}")
    if q.numerator.bit_length() < 1000 and q.denominator.bit_length() < 1000:
        return math.log(float(q))
    return math.log(q.numerator) - math.log(q.denominator)


def ceil_ln(x: Real, label: str = "ceil-ln") -> int:
    """⌈ln x⌉ with the exact value 0 at x = 1."""
    q = to_rational(x)
    if q == 1:
        return 0
    return ceil_rational(ln_rational(q), label=label, inexact=True)


def clamp_unit(value: float) -> float:
    return max(-1.0, min(1.0, value))
