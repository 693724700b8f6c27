"""Exact text forms for integers and rationals.

Big integers travel as exact decimal strings, rationals as
``"numerator/denominator"`` decimal strings.  Serialization is canonical:
integers print plain, rationals print reduced and drop a denominator of 1,
so equal values always produce identical text.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import SpecError


def fmt_int(n: int) -> str:
    return str(int(n))


def fmt_frac(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_int(value, *, field: str | None = None, minimum: int | None = None) -> int:
    if isinstance(value, bool):
        raise SpecError(f"expected an integer, got {value!r}", field=field)
    if isinstance(value, int):
        n = value
    elif isinstance(value, str):
        text = value.strip()
        try:
            n = int(text, 10)
        except ValueError:
            raise SpecError(f"not a decimal integer: {value!r}", field=field) from None
    else:
        raise SpecError(f"expected an integer, got {type(value).__name__}", field=field)
    if minimum is not None and n < minimum:
        raise SpecError(f"expected an integer >= {minimum}, got {n}", field=field)
    return n


def parse_frac(value, *, field: str | None = None) -> Fraction:
    if isinstance(value, bool):
        raise SpecError(f"expected a rational, got {value!r}", field=field)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if not isinstance(value, str):
        raise SpecError(f"expected a rational, got {type(value).__name__}", field=field)
    text = value.strip()
    num, sep, den = text.partition("/")
    try:
        if sep:
            return Fraction(int(num, 10), int(den, 10))
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"not a rational p/q: {value!r}", field=field) from None
    try:
        return Fraction(int(text, 10))
    except ValueError:
        raise SpecError(f"not a rational p/q: {value!r}", field=field) from None
