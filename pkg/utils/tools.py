from __future__ import annotations

from typing import Union, Iterable, Sequence

import re
import math
from fractions import Fraction

from .errors import ParseError

Vector = tuple[Fraction, ...]

_NUMBER = re.compile(r"[+-]?(?:\d+/\d+|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)")


def parse_rational(token: Union[str, int, Fraction]) -> Fraction:
    """Parse a numeric token exactly.

    Accepts integers, decimals ("-2.5", "0.1", "1e-1") and fractions ("p/q"
    with q > 0). Decimals are expanded in base 10, never through a float.
    """
    if isinstance(token, bool):
        raise ParseError(f"Expected a number, got {token!r}.")

    if isinstance(token, (int, Fraction)):
        return Fraction(token)

    text = str(token).strip()
    if not _NUMBER.fullmatch(text):
        raise ParseError(f"Malformed number {token!r}.")

    try:
        return Fraction(text)

    except ZeroDivisionError:
        raise ParseError(f"Zero denominator in {token!r}.") from None


def parse_vector(text: str) -> Vector:
    """Parse a comma separated list of numbers, e.g. ``"0,1,-1/2,0"``."""
    if not text.strip():
        return ()

    return tuple(parse_rational(_part) for _part in text.split(","))


def format_rational(value: Fraction) -> str:
    return str(value)


def format_vector(vector: Iterable[Fraction]) -> str:
    return "(" + ", ".join(format_rational(_v) for _v in vector) + ")"


def format_index_set(indices: Iterable[int]) -> str:
    """Render 0-based indices in the 1-based notation of the reports."""
    return "{" + ",".join(str(_i + 1) for _i in indices) + "}"


def format_flag(value: bool) -> str:
    return "yes" if value else "no"


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def norm_sq(v: Sequence[Fraction]) -> Fraction:
    return dot(v, v)


def norm_inf(v: Sequence[Fraction]) -> Fraction:
    return max((abs(_x) for _x in v), default=Fraction(0))


def support_of(v: Sequence[Fraction]) -> tuple[int, ...]:
    return tuple(i for i, _x in enumerate(v) if _x != 0)


def primitive(vector: Sequence[Fraction], positive_lead: bool = False) -> Vector:
    """Scale a rational vector to the primitive integer vector on its ray.

    With ``positive_lead`` the first nonzero entry is made positive, which
    fixes a canonical representative of the line instead of the ray.
    """
    if all(_x == 0 for _x in vector):
        return tuple(Fraction(0) for _ in vector)

    scale = math.lcm(*(_x.denominator for _x in vector))
    ints = [int(_x * scale) for _x in vector]
    g = math.gcd(*ints)
    ints = [_i // g for _i in ints]

    if positive_lead and next(_i for _i in ints if _i != 0) < 0:
        ints = [-_i for _i in ints]

    return tuple(Fraction(_i) for _i in ints)


def sqrt_bounds(value: Fraction, denominator: int) -> tuple[Fraction, Fraction]:
    """Rationals ``lo <= sqrt(value) <= hi`` with the given denominator.

    Both bounds are exact when ``value`` is a square of a multiple of
    ``1/denominator``.
    """
    if value < 0:
        raise ValueError("square root of a negative number")

    scaled = value.numerator * denominator * denominator
    floor = scaled // value.denominator
    root = math.isqrt(floor)

    lo = Fraction(root, denominator)
    if root * root * value.denominator == scaled:
        return lo, lo

    return lo, Fraction(root + 1, denominator)
