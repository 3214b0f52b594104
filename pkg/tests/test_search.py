import random
from fractions import Fraction

import pytest

from helpers import AB_CD, all_codes, brute_s_min, channel_with_pattern, gamma_by_hand
from zeroerr.channel import ZeroPattern, noiseless, zero_pattern
from zeroerr.codes import gamma, gamma_inverse, make_code
from zeroerr.decide import InstabilityExponent
from zeroerr.errors import InvalidCode, NotFound
from zeroerr.graphs import confusability_graph, strong_power
from zeroerr.search import (
    Exhausted,
    SearchResult,
    construct_code,
    qualifies,
    search_minimal_gamma,
    verify_code,
)

NOISELESS = ZeroPattern(AB_CD, {("a", "d"), ("b", "c")})


def exhaustive_minimum(pattern, base: Fraction) -> int:
    # any code with N >= 3 has at least 6 digits, so its index is >= 5**5
    channel = channel_with_pattern(random.Random(0), pattern)
    best = None
    for n in (1, 2):
        for code in all_codes(pattern.alphabets, n):
            if code.m > base**n and brute_s_min(channel, code) == 1:
                g = gamma_by_hand(code)
                best = g if best is None else min(best, g)
    return best


@pytest.mark.parametrize("base, expected", [(Fraction(3, 2), 566), (Fraction(1, 2), 16)])
def test_minimal_gamma_noiseless(base, expected):
    res = search_minimal_gamma(NOISELESS, InstabilityExponent.point(base), budget=10_000)
    assert isinstance(res, SearchResult)
    assert res.gamma == expected == gamma(res.code)
    assert res.gamma == exhaustive_minimum(NOISELESS, base)
    assert res.n_examined == expected + 1


def test_minimal_gamma_respects_start_and_budget():
    exp = InstabilityExponent.point(Fraction(3, 2))
    assert search_minimal_gamma(NOISELESS, exp, budget=100) == Exhausted(100)
    half = InstabilityExponent.point(Fraction(1, 2))
    res = search_minimal_gamma(NOISELESS, half, budget=10_000, start=17)
    assert res.gamma > 16 and qualifies(res.code, NOISELESS, half)
    assert all(not qualifies(gamma_inverse(n, AB_CD), NOISELESS, half) for n in range(17, res.gamma))
    with pytest.raises(ValueError):
        search_minimal_gamma(NOISELESS, exp, budget=0)


def test_complete_confusability_exhausts():
    res = search_minimal_gamma(ZeroPattern(AB_CD, frozenset()), InstabilityExponent.point(1), budget=5000)
    assert isinstance(res, Exhausted) and res.n_examined == 5000


def test_single_message_never_qualifies():
    exp = InstabilityExponent.point(1)
    for code in all_codes(AB_CD, 1):
        if code.m == 1:
            assert not qualifies(code, NOISELESS, exp)


def test_pentagon_construction(pentagon):
    pattern = zero_pattern(pentagon)
    res = construct_code(pattern, InstabilityExponent.point(Fraction(11, 5)), max_block=2)
    assert (res.code.m, res.code.n) == (5, 2) and res.mode == "independent-set"
    cert = verify_code(res.code, pattern, InstabilityExponent.point(Fraction(11, 5)))
    assert (cert["lhs"], cert["rhs"]) == ("125", "121")
    g2 = strong_power(confusability_graph(pattern), 2)
    assert g2.is_independent(res.code.messages)
    with pytest.raises(NotFound):
        construct_code(pattern, InstabilityExponent.point(Fraction(23, 10)), max_block=2)


def test_emitted_codes_are_zero_error_on_random_channels(pentagon):
    rng = random.Random(21)
    cases = [
        (zero_pattern(pentagon), Fraction(11, 5), 2),
        (NOISELESS, Fraction(3, 2), 1),
        (zero_pattern(noiseless(3)), Fraction(5, 2), 1),
    ]
    for pattern, base, block in cases:
        res = construct_code(pattern, InstabilityExponent.point(base), max_block=block)
        for _ in range(100):
            assert brute_s_min(channel_with_pattern(rng, pattern), res.code) == 1


def test_verify_code_failures():
    exp = InstabilityExponent.point(Fraction(3, 2))
    with pytest.raises(InvalidCode):
        verify_code(make_code(AB_CD, [("a", "c"), ("b", "d")]), ZeroPattern(AB_CD, frozenset()), exp)
    with pytest.raises(InvalidCode):
        verify_code(make_code(AB_CD, [("a", "c")]), NOISELESS, exp)
    cert = verify_code(make_code(AB_CD, [("a", "c"), ("b", "d")]), NOISELESS, exp)
    assert cert["gamma"] == "566" and cert["anti_code_size"] == 2


def test_interval_hi_is_used():
    # lo passes, hi does not: the code must not be certified
    exp = InstabilityExponent(Fraction(19, 10), Fraction(2))
    assert not qualifies(make_code(AB_CD, [("a", "c"), ("b", "d")]), NOISELESS, exp)
    assert isinstance(search_minimal_gamma(NOISELESS, exp, budget=3000), Exhausted)


def test_result_json():
    res = search_minimal_gamma(NOISELESS, InstabilityExponent.point(Fraction(3, 2)), budget=1000)
    data = res.to_json()
    assert data["gamma"] == "566" and data["mode"] == "faithful-gamma"
    assert Exhausted(3).to_json()["exhausted"]
