"""Decimal rendering for exact rationals."""

from __future__ import annotations

from decimal import Decimal, localcontext
from fractions import Fraction

FALLBACK_DIGITS = 6


def is_terminating(q: Fraction) -> bool:
    den = q.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def format_decimal(q: Fraction | int) -> str:
    """Exact decimal when ``q`` terminates, else rounded to six places.

    >>> format_decimal(Fraction(153, 1000)), format_decimal(Fraction(2)), format_decimal(Fraction(1, 3))
    ('0.153', '2', '0.333333')
    """
    q = Fraction(q)
    if is_terminating(q):
        den = q.denominator
        digits = 0
        while den != 1 and (10**digits) % den:
            digits += 1
        scaled = q.numerator * (10**digits // den)
        sign = "-" if scaled < 0 else ""
        text = str(abs(scaled)).rjust(digits + 1, "0")
        if digits:
            text = text[:-digits] + "." + text[-digits:]
        return sign + text
    with localcontext() as ctx:
        ctx.prec = 60
        value = Decimal(q.numerator) / Decimal(q.denominator)
    return f"{value:.{FALLBACK_DIGITS}f}"
