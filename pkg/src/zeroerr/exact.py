"""Exact rational helpers and a tiny radical type for capacity values."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Union

from .errors import ParseError

RationalLike = Union[Fraction, int, str]


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, a decimal string or an int into an exact Fraction.

    Floats are rejected: they are binary approximations and would silently
    break exact zero tests. JSON loaders in this package hand decimals over
    as strings (or as Fractions via ``parse_float``) so nothing is lost.
    """
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(f"refusing inexact float {value!r}; quote it as a string")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    raise ParseError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n (n >= 0)."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    r = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def exact_root(q: Fraction, k: int) -> Fraction | None:
    """The rational k-th root of q >= 0, or None if it is irrational."""
    p, d = q.numerator, q.denominator
    rp, rd = iroot(p, k), iroot(d, k)
    if rp ** k == p and rd ** k == d:
        return Fraction(rp, rd)
    return None


def sqrt_bounds(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rational lo <= sqrt(q) <= hi with hi - lo <= 2**-bits / denominator."""
    if q < 0:
        raise ValueError("negative argument")
    a, b = q.numerator, q.denominator
    scale = 1 << bits
    s = math.isqrt(a * b * scale * scale)
    lo = Fraction(s, b * scale)
    hi = lo if s * s == a * b * scale * scale else Fraction(s + 1, b * scale)
    return lo, hi


_RADICAL_RE = re.compile(
    r"^\s*(?:sqrt\((?P<sq>[^()]+)\)|\((?P<base>[^()]+)\)\^\(1/(?P<deg>\d+)\)|(?P<plain>[^()^]+))\s*$"
)


@total_ordering
@dataclass(frozen=True)
class Radical:
    """The positive real ``radicand ** (1/degree)``.

    Capacity values live in the exponentiated domain (2**C0); the only
    irrational one we ever store is sqrt(5), so a rational radicand with an
    integer degree is enough, and every comparison stays an integer one.
    """

    radicand: Fraction
    degree: int = 1

    def __post_init__(self):
        r = Fraction(self.radicand)
        if r < 0 or self.degree < 1:
            raise ValueError("radical needs radicand >= 0 and degree >= 1")
        deg = self.degree
        # reduce e.g. sqrt(4) -> 2, (8)^(1/6) -> sqrt(2)
        for k in sorted(_divisors(deg), reverse=True):
            if k == 1:
                break
            root = exact_root(r, k)
            if root is not None:
                r, deg = root, deg // k
                break
        object.__setattr__(self, "radicand", r)
        object.__setattr__(self, "degree", deg)

    @classmethod
    def parse(cls, text: str) -> "Radical":
        m = _RADICAL_RE.match(text)
        if not m:
            raise ParseError(f"not a radical: {text!r}")
        if m.group("sq") is not None:
            return cls(parse_rational(m.group("sq")), 2)
        if m.group("base") is not None:
            return cls(parse_rational(m.group("base")), int(m.group("deg")))
        return cls(parse_rational(m.group("plain")), 1)

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def as_fraction(self) -> Fraction:
        if self.degree != 1:
            raise ValueError(f"{self} is irrational")
        return self.radicand

    def power_compare(self, other: "Radical") -> int:
        """Sign of self - other, via a**(k2) versus b**(k1)."""
        lhs = self.radicand ** other.degree
        rhs = other.radicand ** self.degree
        return (lhs > rhs) - (lhs < rhs)

    def _coerce(self, other) -> "Radical":
        if isinstance(other, Radical):
            return other
        if isinstance(other, (int, Fraction)):
            return Radical(Fraction(other))
        return NotImplemented

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.power_compare(o) == 0

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.power_compare(o) < 0

    def __hash__(self):
        if self.degree == 1:
            return hash(self.radicand)
        return hash((self.radicand, self.degree))

    def __float__(self):
        return float(self.radicand) ** (1.0 / self.degree)

    def __str__(self):
        if self.degree == 1:
            return format_rational(self.radicand)
        if self.degree == 2:
            return f"sqrt({format_rational(self.radicand)})"
        return f"({format_rational(self.radicand)})^(1/{self.degree})"


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def power_exceeds(count: int, base: Fraction, n: int) -> bool:
    """count > base**n, decided on cross-multiplied integers."""
    base = Fraction(base)
    return count * base.denominator ** n > base.numerator ** n
