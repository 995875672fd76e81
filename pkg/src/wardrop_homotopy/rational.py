"""Exact rational scalars extended with +/- infinity.

Finite values are ``fractions.Fraction``; the infinities are the float
values ``math.inf`` and ``-math.inf``, which compare correctly against
fractions.
"""

from __future__ import annotations

import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Union

INF = math.inf
NEG_INF = -math.inf

Ext = Union[Fraction, float]


class RationalParseError(ValueError):
    pass


def parse_rational(text, allow_infinite: bool = True) -> Ext:
    """Parse "p/q", an integer, a decimal string or "inf"/"-inf" exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise RationalParseError(f"expected a rational string, got {text!r}")
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity"):
        if not allow_infinite:
            raise RationalParseError(f"infinite value not allowed here: {text!r}")
        return INF
    if s in ("-inf", "-infinity"):
        if not allow_infinite:
            raise RationalParseError(f"infinite value not allowed here: {text!r}")
        return NEG_INF
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(Decimal(s))
    except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
        raise RationalParseError(f"not a rational number: {text!r}") from exc


def format_rational(value: Ext) -> str:
    if is_infinite(value):
        return "inf" if value > 0 else "-inf"
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Ext, digits: int = 15) -> str:
    """Decimal rendering with ``digits`` significant digits."""
    if is_infinite(value):
        return "inf" if value > 0 else "-inf"
    value = Fraction(value)
    if value == 0:
        return "0"
    return f"{float(value):.{digits}g}" if _fits_float(value) else _big_decimal(value, digits)


def _fits_float(value: Fraction) -> bool:
    try:
        return math.isfinite(float(value))
    except OverflowError:
        return False


def _big_decimal(value: Fraction, digits: int) -> str:
    from decimal import localcontext

    with localcontext() as ctx:
        ctx.prec = digits
        return format(Decimal(value.numerator) / Decimal(value.denominator), f".{digits - 1}e")


def is_infinite(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


def coeff_bits(value: Ext) -> int:
    """Largest bit length of numerator or denominator (0 for infinities)."""
    if is_infinite(value):
        return 0
    value = Fraction(value)
    return max(abs(value.numerator).bit_length(), value.denominator.bit_length())
