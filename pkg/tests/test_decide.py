import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from helpers import AB_CD, alphabets, random_channel
from zeroerr.channel import all_patterns, binary_symmetric, noiseless, validate_channel
from zeroerr.decide import (
    InstabilityExponent,
    Outcome,
    Plant,
    decide_solvability,
    indicator_s,
    indicator_u,
    instability_exponent,
    load_plant,
    loads_plant,
    verdict_from_json,
    verify_verdict,
)
from zeroerr.errors import DimensionMismatch, ParseError


def numpy_base(matrix) -> float:
    ev = np.linalg.eigvals(np.array([[float(v) for v in row] for row in matrix]))
    return float(np.prod([max(abs(x), 1.0) for x in ev]))


def test_scalar_and_diagonal():
    e = instability_exponent(Plant.scalar(2))
    assert (e.lo, e.hi, e.exact) == (2, 2, True)
    e = instability_exponent(Plant(((2, 0), (0, Fraction(1, 2)))))
    assert (e.lo, e.hi) == (2, 2) and not e.boundary_flag


def test_complex_pair_is_exact():
    e = instability_exponent(Plant(((0, -2), (1, 0))))
    assert e.lo == e.hi == 2 and e.exact


def test_golden_ratio_is_bracketed():
    e = instability_exponent(Plant(((1, 1), (1, 0))))
    phi = (1 + math.sqrt(5)) / 2
    assert e.lo <= Fraction(phi) * (1 + Fraction(1, 10**12)) and e.hi >= Fraction(phi) * (1 - Fraction(1, 10**12))
    assert e.lo < e.hi and e.hi * 2**30 <= e.lo * (2**30 + 1)
    # φ is the root of x^2 - x - 1
    assert e.lo**2 - e.lo - 1 <= 0 <= e.hi**2 - e.hi - 1


def test_precision_flag_tightens():
    coarse = instability_exponent(Plant(((1, 1), (1, 0))), precision=10)
    fine = instability_exponent(Plant(((1, 1), (1, 0))), precision=80)
    assert fine.hi - fine.lo < coarse.hi - coarse.lo or coarse.lo == coarse.hi
    assert fine.hi * 2**80 <= fine.lo * (2**80 + 1)


def test_boundary_flag_on_unit_moduli():
    assert instability_exponent(Plant(((1, 0), (0, 1)))).boundary_flag
    rot = Plant(((Fraction(3, 5), Fraction(-4, 5)), (Fraction(4, 5), Fraction(3, 5))))
    e = instability_exponent(rot)
    assert e.lo == e.hi == 1 and e.boundary_flag


def test_random_matrices_against_numpy():
    rng = random.Random(12)
    for _ in range(25):
        n = rng.randint(1, 4)
        m = [[Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)] for _ in range(n)]
        e = instability_exponent(Plant(tuple(map(tuple, m))))
        ref = numpy_base(m)
        assert float(e.lo) <= ref * (1 + 1e-9) and float(e.hi) >= ref * (1 - 1e-9)


def test_eigen_moduli_input():
    p = loads_plant('{"matrix": [["1","1"],["1","0"]], "eigen_moduli": [["1618/1000","1619/1000"],["0.6","0.7"]]}')
    e = instability_exponent(p)
    assert (e.lo, e.hi) == (Fraction(1618, 1000), Fraction(1619, 1000))
    with pytest.raises(DimensionMismatch):
        Plant(((1,),), eigen_moduli=(("1", "1"), ("1", "1")))
    with pytest.raises(DimensionMismatch):
        Plant(((1, 2),))
    with pytest.raises(ParseError):
        loads_plant("{}")


def test_plant_json_round_trip(data_dir):
    p = load_plant(data_dir / "plant_3_2.json")
    assert p == Plant.scalar(Fraction(3, 2))
    assert loads_plant(json.dumps(p.to_json())) == p


def test_reference_verdicts(noiseless2, pentagon):
    v = decide_solvability(Plant.scalar(Fraction(3, 2)), noiseless2)
    assert v.outcome is Outcome.SOLVABLE and verify_verdict(v, noiseless2)
    for ch in [noiseless2, binary_symmetric("1/10"), validate_channel([[0, 1], ["1/2", "1/2"]], AB_CD)]:
        v = decide_solvability(Plant.scalar(3), ch)
        assert v.outcome is Outcome.UNSOLVABLE and verify_verdict(v, ch)
    v = decide_solvability(Plant.scalar(2), noiseless2)
    assert v.outcome is Outcome.BOUNDARY and v.exact_tie and verify_verdict(v, noiseless2)
    v = decide_solvability(Plant.scalar(Fraction(11, 5)), pentagon)
    assert v.outcome is Outcome.SOLVABLE and verify_verdict(v, pentagon)
    assert (v.certificate["lhs"], v.certificate["rhs"]) == ("125", "121")
    assert (v.code.m, v.code.n) == (5, 2)


def test_pentagon_above_sqrt5(pentagon):
    for a in [Fraction(23, 10), Fraction(9, 4), Fraction(5, 2)]:
        v = decide_solvability(Plant.scalar(a), pentagon)
        assert v.outcome is Outcome.UNSOLVABLE and verify_verdict(v, pentagon)


def test_undetermined_without_registry_value():
    # 7-cycle: lower sqrt(10) ≈ 3.16 at depth 2, clique cover 4
    ch = validate_channel(
        [[Fraction(1, 2) if j in (i, (i + 1) % 7) else 0 for j in range(7)] for i in range(7)],
        alphabets(7, 7),
    )
    v = decide_solvability(Plant.scalar(Fraction(33, 10)), ch)
    assert v.bounds.exact is None
    assert v.outcome is Outcome.UNDETERMINED_BOUNDS and verify_verdict(v, ch)
    assert indicator_s(Plant.scalar(Fraction(33, 10)), ch) is None
    assert indicator_u(Plant.scalar(Fraction(33, 10)), ch) is None
    v = decide_solvability(Plant.scalar(3), ch, exponent=InstabilityExponent.point(3))
    assert v.outcome is Outcome.SOLVABLE


def test_indicators(noiseless2):
    assert indicator_s(Plant.scalar(Fraction(3, 2)), noiseless2) == 1
    assert indicator_u(Plant.scalar(Fraction(3, 2)), noiseless2) == 0
    assert indicator_u(Plant.scalar(3), binary_symmetric("1/10")) == 1
    assert indicator_s(Plant.scalar(2), noiseless2) == 0 == indicator_u(Plant.scalar(2), noiseless2)


def test_scalar_monotonicity(noiseless2, pentagon):
    order = {Outcome.SOLVABLE: 0, Outcome.BOUNDARY: 1, Outcome.UNSOLVABLE: 2}
    for ch in [noiseless2, pentagon]:
        prev_rank, prev_base = -1, Fraction(0)
        for k in range(1, 40):
            a = Fraction(k, 10)
            v = decide_solvability(Plant.scalar(a), ch)
            rank = order[v.outcome]
            assert rank >= prev_rank
            assert v.exponent.lo >= prev_base
            prev_rank, prev_base = rank, v.exponent.lo


@pytest.mark.parametrize("depths", [(1, 2), (1, 2, 3)])
def test_depth_monotonicity(pentagon, depths):
    ch = pentagon if len(depths) == 2 else noiseless(3)
    a = Fraction(11, 5) if ch is pentagon else Fraction(5, 2)
    seen = False
    for depth in depths:
        v = decide_solvability(Plant.scalar(a), ch, depth=depth)
        if seen:
            assert v.outcome is Outcome.SOLVABLE
        seen = seen or v.outcome is Outcome.SOLVABLE
    assert seen


def test_agreement_with_known_capacity():
    # every binary pattern has an exact capacity in {1, 2}
    rng = random.Random(6)
    for pattern in all_patterns(AB_CD):
        ch = None
        for _ in range(200):
            cand = random_channel(rng, AB_CD)
            if cand and frozenset(pattern.omega) == frozenset(
                c for c, p in zip(AB_CD.cells(), cand.w) if p == 0
            ):
                ch = cand
                break
        if ch is None:
            continue
        for a in [Fraction(1, 2), Fraction(3, 2), Fraction(5, 2)]:
            v = decide_solvability(Plant.scalar(a), ch)
            cap = v.bounds.exact
            assert (v.outcome is Outcome.SOLVABLE) == (v.exponent.hi < cap)
            assert (v.outcome is Outcome.UNSOLVABLE) == (v.exponent.lo > cap)
            assert verify_verdict(v, ch)


def test_verdict_json_round_trip(noiseless2, pentagon):
    cases = [
        (Plant.scalar(Fraction(3, 2)), noiseless2),
        (Plant.scalar(3), noiseless2),
        (Plant.scalar(2), noiseless2),
        (Plant.scalar(Fraction(11, 5)), pentagon),
        (Plant.scalar(Fraction(9, 4)), pentagon),
    ]
    for plant, ch in cases:
        v = decide_solvability(plant, ch)
        again = verdict_from_json(json.loads(json.dumps(v.to_json())))
        assert again.outcome is v.outcome
        assert verify_verdict(again, ch)


def test_tampered_certificate_fails(pentagon):
    v = decide_solvability(Plant.scalar(Fraction(11, 5)), pentagon)
    data = v.to_json()
    data["certificate"]["witness"][0] = data["certificate"]["witness"][1]
    assert not verify_verdict(verdict_from_json(data), pentagon)
    data = v.to_json()
    data["base"]["hi"] = "23/10"
    assert not verify_verdict(verdict_from_json(data), pentagon)


def test_exponent_interval_invariant():
    with pytest.raises(ValueError):
        InstabilityExponent(Fraction(2), Fraction(1))
    assert InstabilityExponent.from_json(InstabilityExponent.point("7/3").to_json()) == InstabilityExponent.point("7/3")


def test_noiseless_three_symbol(noiseless2):
    ch = noiseless(3)
    v = decide_solvability(Plant(((2, 1), (0, Fraction(3, 2)))), ch)
    assert v.exponent.lo == 3 and v.outcome is Outcome.BOUNDARY
