import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zeroerr.errors import ParseError
from zeroerr.exact import Radical, exact_root, iroot, parse_rational, power_exceeds, sqrt_bounds


@pytest.mark.parametrize(
    "text, value",
    [("1/2", Fraction(1, 2)), ("0.25", Fraction(1, 4)), (" 3 ", Fraction(3)), (7, Fraction(7)), ("-2/6", Fraction(-1, 3))],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", [0.5, True, "x", "1/0", None])
def test_parse_rational_rejects(bad):
    with pytest.raises(ParseError):
        parse_rational(bad)


@given(st.integers(min_value=0, max_value=10**40), st.integers(min_value=1, max_value=7))
def test_iroot_is_floor_root(n, k):
    r = iroot(n, k)
    assert r ** k <= n < (r + 1) ** k


def test_exact_root():
    assert exact_root(Fraction(9, 4), 2) == Fraction(3, 2)
    assert exact_root(Fraction(5), 2) is None
    assert exact_root(Fraction(8, 27), 3) == Fraction(2, 3)


@given(st.fractions(min_value=0, max_value=1000), st.integers(min_value=4, max_value=60))
def test_sqrt_bounds_bracket(q, bits):
    lo, hi = sqrt_bounds(q, bits)
    assert lo * lo <= q <= hi * hi
    assert hi - lo <= Fraction(1, 2 ** bits * q.denominator)


def test_radical_reduction_and_parse():
    assert Radical(Fraction(4), 2) == 2
    assert Radical(Fraction(8), 6) == Radical(Fraction(2), 2)
    assert Radical.parse("sqrt(5)") == Radical(Fraction(5), 2)
    assert Radical.parse("(27)^(1/3)") == 3
    assert str(Radical.parse("sqrt(5)")) == "sqrt(5)"
    assert str(Radical(Fraction(7, 2))) == "7/2"


def test_radical_ordering_is_exact():
    r5 = Radical(Fraction(5), 2)
    assert Fraction(11, 5) < r5 < Fraction(9, 4)
    assert r5 > Fraction(2236067977, 10**9)
    assert r5 < Fraction(2236067978, 10**9)
    assert not r5.is_rational
    with pytest.raises(ValueError):
        r5.as_fraction()
    assert math.isclose(float(r5), math.sqrt(5))


def test_radical_hash_matches_rationals():
    assert len({Radical(Fraction(2)), Radical(Fraction(4), 2)}) == 1


@given(st.integers(min_value=1, max_value=50), st.fractions(min_value=Fraction(1, 10), max_value=10), st.integers(min_value=1, max_value=8))
def test_power_exceeds_matches_fraction_power(count, base, n):
    assert power_exceeds(count, base, n) == (count > base ** n)
