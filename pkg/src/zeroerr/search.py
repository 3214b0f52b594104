"""Finding zero-error codes whose rate beats the instability exponent.

Two routes: a literal scan over code numbers n = 0, 1, 2, ... (tiny
instances only, the numbers grow exponentially in the code size) and a
constructor built on maximum independent sets of strong powers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import ZeroPattern
from .codes import Code, anti_code, code_from_messages, gamma, gamma_inverse, is_zero_error
from .decide import InstabilityExponent
from .errors import InvalidCode, NotFound
from .exact import format_rational, power_exceeds
from .graphs import DEFAULT_VERTEX_LIMIT, confusability_graph, independence_number, strong_power


@dataclass(frozen=True)
class SearchResult:
    code: Code
    gamma: int
    n_examined: int
    mode: str  # faithful-gamma | independent-set

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "gamma": str(self.gamma),
            "n_examined": self.n_examined,
            "code": self.code.to_json(),
        }


@dataclass(frozen=True)
class Exhausted:
    n_examined: int

    def to_json(self) -> dict:
        return {"mode": "faithful-gamma", "exhausted": True, "n_examined": self.n_examined}


def qualifies(code: Code | None, pattern: ZeroPattern, exponent: InstabilityExponent) -> bool:
    """Zero-error for the pattern and M > hi**N."""
    if code is None:
        return False
    return power_exceeds(code.m, exponent.hi, code.block_length) and is_zero_error(code, pattern)


def search_minimal_gamma(
    pattern: ZeroPattern, exponent: InstabilityExponent, budget: int, start: int = 0
) -> SearchResult | Exhausted:
    """Least n >= start numbering a qualifying code, scanning at most ``budget`` indices."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    alphabets = pattern.alphabets
    for n in range(start, start + budget):
        code = gamma_inverse(n, alphabets)
        if qualifies(code, pattern, exponent):
            return SearchResult(code, n, n - start + 1, "faithful-gamma")
    return Exhausted(budget)


def construct_code(
    pattern: ZeroPattern,
    exponent: InstabilityExponent,
    max_block: int,
    vertex_limit: int = DEFAULT_VERTEX_LIMIT,
) -> SearchResult:
    """Smallest N <= max_block with α(G^⊠N) > hi**N, returned as a full-reachability code."""
    if max_block < 1:
        raise ValueError("max_block must be >= 1")
    g = confusability_graph(pattern)
    for n in range(1, max_block + 1):
        power = strong_power(g, n, vertex_limit)
        size, witness = independence_number(power, vertex_limit)
        if power_exceeds(size, exponent.hi, n):
            code = code_from_messages(pattern, witness)
            return SearchResult(code, gamma(code), n, "independent-set")
    raise NotFound(f"no block length <= {max_block} has α(G^⊠N) > {exponent.hi}^N")


def verify_code(code: Code, pattern: ZeroPattern, exponent: InstabilityExponent) -> dict:
    """Re-check zero-error and rate; returns the certificate or raises InvalidCode."""
    if not is_zero_error(code, pattern):
        raise InvalidCode("code is not zero-error for the pattern")
    hi, n, m = exponent.hi, code.block_length, code.m
    lhs, rhs = m * hi.denominator ** n, hi.numerator ** n
    if lhs <= rhs:
        raise InvalidCode(f"rate check failed: M = {m} <= ({hi})^{n}")
    return {
        "zero_error": True,
        "anti_code_size": len(anti_code(code)),
        "m": m,
        "n": n,
        "hi": format_rational(hi),
        "lhs": str(lhs),
        "rhs": str(rhs),
        "gamma": str(gamma(code)),
    }
