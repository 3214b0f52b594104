import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import AB_CD, alphabets, brute_s_min, gamma_by_hand, random_channel, random_code
from zeroerr.channel import ZeroPattern, s_min, typewriter, zero_pattern
from zeroerr.codes import (
    Code,
    anti_code,
    code_from_messages,
    code_word,
    delta,
    dumps_code,
    gamma,
    gamma_inverse,
    is_zero_error,
    loads_code,
    make_code,
    rate_r0,
    theta_m,
    theta_n,
)
from zeroerr.errors import InvalidCode, ParseError
from zeroerr.graphs import confusability_graph, independence_number, strong_power

NOISELESS = ZeroPattern(AB_CD, {("a", "d"), ("b", "c")})
EMPTY = ZeroPattern(AB_CD, frozenset())


def test_code_word_examples():
    assert code_word(make_code(AB_CD, [("a", "c")])) == ("a", "c")
    assert code_word(make_code(AB_CD, [("b", "d"), ("a", "c")])) == ("a", "c", "b", "d")
    assert code_word(make_code(AB_CD, [("ab", "cd")])) == ("a", "b", "c", "d")


@pytest.mark.parametrize(
    "pairs, value",
    [([("a", "c")], 16), ([("b", "d")], 22), ([("a", "c"), ("b", "d")], 566)],
)
def test_gamma_examples(pairs, value):
    assert gamma(make_code(AB_CD, pairs)) == value


def test_gamma_inverse_examples():
    assert gamma_inverse(16, AB_CD) == make_code(AB_CD, [("a", "c")])
    assert gamma_inverse(17, AB_CD) == make_code(AB_CD, [("b", "c")])
    assert gamma_inverse(0, AB_CD) is None


def test_gamma_inverse_rejections():
    # digit 0
    assert gamma_inverse(5 * 16, AB_CD) is None
    # "ca": output before input
    assert gamma_inverse(3 + 1 * 5, AB_CD) is None
    # pairs out of canonical order: (b,d) then (a,c)
    assert gamma_inverse(2 + 4 * 5 + 1 * 25 + 3 * 125, AB_CD) is None
    # condition 1: (a,c) and (b,c)
    assert gamma_inverse(1 + 3 * 5 + 2 * 25 + 3 * 125, AB_CD) is None
    # repeated pair
    assert gamma_inverse(16 + 16 * 25, AB_CD) is None


def test_theta_examples():
    assert (theta_n(16, AB_CD), theta_m(16, AB_CD)) == (1, 1)
    assert (theta_n(566, AB_CD), theta_m(566, AB_CD)) == (1, 2)
    assert (theta_n(0, AB_CD), theta_m(0, AB_CD)) == (0, 0)


def test_theta_zero_exactly_on_non_codes():
    for n in range(0, 4000):
        code = gamma_inverse(n, AB_CD)
        if code is None:
            assert theta_n(n, AB_CD) == theta_m(n, AB_CD) == 0
        else:
            assert theta_n(n, AB_CD) == code.block_length >= 1
            assert theta_m(n, AB_CD) == code.m >= 1
            assert gamma(code) == n


def test_code_condition_one():
    with pytest.raises(InvalidCode):
        make_code(AB_CD, [("a", "c"), ("b", "c")])
    with pytest.raises(InvalidCode):
        make_code(AB_CD, [("a", "cd")])
    with pytest.raises(InvalidCode):
        make_code(AB_CD, [])
    with pytest.raises(InvalidCode):
        make_code(AB_CD, [("z", "c")])


def test_anti_code_examples():
    assert anti_code(make_code(AB_CD, [("a", "c"), ("b", "d")])) == {(("a",), ("d",)), (("b",), ("c",))}
    assert anti_code(make_code(AB_CD, [("a", "c"), ("a", "d")])) == frozenset()
    assert anti_code(make_code(AB_CD, [("a", "c")])) == {(("a",), ("d",))}


def test_zero_error_examples(pentagon):
    assert is_zero_error(make_code(AB_CD, [("a", "c"), ("b", "d")]), NOISELESS)
    assert not is_zero_error(make_code(AB_CD, [("a", "c"), ("b", "d")]), EMPTY)
    pattern = zero_pattern(pentagon)
    g2 = strong_power(confusability_graph(pattern), 2)
    size, witness = independence_number(g2)
    code = code_from_messages(pattern, witness)
    assert (code.m, code.n) == (5, 2)
    assert is_zero_error(code, pattern)
    assert s_min(pentagon, code) == 1 == brute_s_min(pentagon, code)


def test_delta_examples():
    assert delta(16, NOISELESS) == 1
    assert delta(16, EMPTY) == 0
    assert delta(0, NOISELESS) == 0


def test_rate_r0_examples(pentagon):
    r = rate_r0(make_code(AB_CD, [("a", "c"), ("b", "d")]), NOISELESS)
    assert (r.m, r.n, r.zero_error) == (2, 1, True)
    r = rate_r0(make_code(AB_CD, [("a", "c"), ("b", "d")]), EMPTY)
    assert not r.zero_error and not r.exceeds(1)
    pattern = zero_pattern(pentagon)
    size, witness = independence_number(strong_power(confusability_graph(pattern), 2))
    r = rate_r0(code_from_messages(pattern, witness), pattern)
    assert (r.m, r.n, r.zero_error) == (5, 2, True)


def test_empty_anti_code_means_zero_error_everywhere():
    code = make_code(AB_CD, [("a", "c"), ("a", "d")])
    for omega in itertools.chain.from_iterable(
        itertools.combinations([("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")], k) for k in range(5)
    ):
        assert is_zero_error(code, ZeroPattern(AB_CD, omega))


@st.composite
def codes(draw):
    nx_, ny = draw(st.integers(1, 4)), draw(st.integers(1, 4))
    n = draw(st.integers(1, 3))
    rng = random.Random(draw(st.integers(0, 2**32)))
    return random_code(rng, alphabets(nx_, ny), n)


@settings(max_examples=200, deadline=None)
@given(codes())
def test_gamma_round_trip(code):
    g = gamma(code)
    assert g == gamma_by_hand(code)
    assert gamma_inverse(g, code.alphabets) == code


@settings(max_examples=100, deadline=None)
@given(codes(), codes())
def test_gamma_injective(c1, c2):
    if c1.alphabets == c2.alphabets and c1 != c2:
        assert gamma(c1) != gamma(c2)


def test_delta_matches_s_min_on_random_channels():
    rng = random.Random(9)
    a = alphabets(2, 2)
    hits = 0
    for _ in range(200):
        ch = random_channel(rng, a, p_zero=0.5)
        code = random_code(rng, a, rng.randint(1, 2))
        d = delta(gamma(code), zero_pattern(ch))
        assert d == int(brute_s_min(ch, code) == 1)
        hits += d
    assert hits > 0


def test_code_json_round_trip(pentagon):
    code = make_code(AB_CD, [("ab", "cd"), ("ba", "dc"), ("ba", "dd")])
    again = loads_code(dumps_code(code))
    assert again == code
    assert code.to_json()["gamma"] == str(gamma(code))


def test_code_json_rejects_wrong_gamma():
    data = make_code(AB_CD, [("a", "c")]).to_json()
    data["gamma"] = "17"
    import json

    with pytest.raises(ParseError):
        loads_code(json.dumps(data))
    with pytest.raises(ParseError):
        loads_code("[")
