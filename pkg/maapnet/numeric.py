"""
Numeric tower shared by the interpreter and the forward pass.

Two modes are supported:
- RATIONAL: exact arithmetic with fractions.Fraction (ground truth for every
  equivalence check)
- FLOAT: IEEE doubles, what a deployed network computes

Every evaluator takes an optional mode; when omitted it is inferred from the
inputs (any float selects FLOAT).
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Union

from .errors import DocumentParseError, NumericOverflowError

Number = Union[Fraction, float]

# Denominators beyond this many digits are treated as runaway growth
MAX_DENOMINATOR_DIGITS = 10_000


class Mode(str, Enum):
    RATIONAL = "rational"
    FLOAT = "float"


def infer_mode(values: Iterable[object]) -> Mode:
    for value in values:
        if isinstance(value, float):
            return Mode.FLOAT
    return Mode.RATIONAL


def to_number(value: object, mode: Mode) -> Number:
    """Convert an int, float, Fraction or "p/q" string to the mode's number type."""
    if isinstance(value, str):
        value = parse_rational(value)
    if mode is Mode.FLOAT:
        return float(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NumericOverflowError(f"non-finite value {value!r} in exact mode")
        return Fraction(value)
    return Fraction(value)


def coerce(values: Sequence[object], mode: Optional[Mode] = None) -> List[Number]:
    mode = mode or infer_mode(values)
    return [to_number(v, mode) for v in values]


def parse_rational(text: str) -> Fraction:
    """Parse "p/q", an integer or a decimal literal exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DocumentParseError(f"invalid rational literal {text!r}: {e}")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_number(value: Number) -> str:
    if isinstance(value, float):
        return repr(value)
    return format_rational(value)


def check_exact(value: Fraction) -> Fraction:
    if len(str(value.denominator)) > MAX_DENOMINATOR_DIGITS:
        raise NumericOverflowError("rational denominator exceeded the size limit")
    return value


def relative_close(a: Number, b: Number, rtol: float, atol: float = 1e-12) -> bool:
    a, b = float(a), float(b)
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), atol)
