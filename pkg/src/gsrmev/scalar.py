"""Scalar helpers shared by both numeric modes.

Exact mode carries :class:`fractions.Fraction` values end to end. Float mode
carries Python floats and compares reserves with an absolute tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float]

RESERVE_ATOL = 1e-9
PROFIT_RTOL = 1e-12


def parse_scalar(text: str | int, exact: bool = True) -> Scalar:
    """Parse a decimal string ("0.19") or rational string ("19/100")."""
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ValueError(f"scalar must be a decimal or p/q string, got {text!r}")
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a decimal or rational string: {text!r}") from exc
    return value if exact else float(value)


def format_scalar(value: Scalar) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def is_exact(*values: Scalar) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def rational_sqrt(value: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    value = Fraction(value)
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def sqrt(value: Scalar) -> Scalar:
    # falls back to float when the rational root does not exist
    if isinstance(value, Fraction):
        root = rational_sqrt(value)
        if root is not None:
            return root
    return math.sqrt(value)


def leq(a: Scalar, b: Scalar, atol: float = RESERVE_ATOL) -> bool:
    """a <= b, exactly for rationals and with ties biased to True for floats."""
    if is_exact(a, b):
        return a <= b
    return a <= b + atol


def close(a: Scalar, b: Scalar, rtol: float = PROFIT_RTOL, atol: float = 0.0) -> bool:
    if is_exact(a, b):
        return a == b
    return abs(a - b) <= max(atol, rtol * max(abs(a), abs(b)))


def to_float(value: Scalar) -> float:
    return float(value)
