"""Exact rational parsing and formatting."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction or "p/q" string to a Fraction.

    Floats are rejected so that no binary rounding enters the solve path.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities or costs")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"decimal literal {value!r} is not allowed; write p/q")
        return Fraction(text)
    raise TypeError(f"expected int or 'p/q' string, got {type(value).__name__}")


def fmt(q: Fraction) -> str:
    """Lossless "p/q" rendering; integers keep an explicit denominator."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def fmt_all(values: Iterable[Fraction]) -> list[str]:
    return [fmt(v) for v in values]
