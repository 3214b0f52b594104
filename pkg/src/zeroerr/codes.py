"""(N, M)-codes, their positional numbering, anti-codes and the zero-error test.

A code is a set of (input word, output word) pairs. To make the numbering
a function of the set, pairs are concatenated in canonical order: sorted by
the input word, then the output word, each compared digit-wise in the
alphabet order (i.e. by Σ).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .channel import AlphabetPair, ZeroPattern
from .errors import InvalidCode, ParseError


@dataclass(frozen=True)
class Code:
    alphabets: AlphabetPair
    block_length: int
    pairs: frozenset  # of (input word, output word), words are tuples of symbols

    def __post_init__(self):
        n = self.block_length
        a = self.alphabets
        if n < 1:
            raise InvalidCode("block length must be >= 1")
        pairs = frozenset((tuple(x), tuple(y)) for x, y in self.pairs)
        if not pairs:
            raise InvalidCode("a code needs at least one pair")
        owner: dict = {}
        for x, y in pairs:
            if len(x) != n or len(y) != n:
                raise InvalidCode(f"pair {x}/{y} is not of length {n}")
            if any(s not in a.input_index for s in x) or any(s not in a.output_index for s in y):
                raise InvalidCode(f"pair {x}/{y} uses symbols outside the alphabets")
            if owner.setdefault(y, x) != x:
                raise InvalidCode(f"output word {y} is paired with two messages")
        object.__setattr__(self, "pairs", pairs)

    @cached_property
    def messages(self) -> tuple:
        """The message set, in canonical order."""
        return tuple(sorted({x for x, _ in self.pairs}, key=self._word_key))

    @property
    def m(self) -> int:
        return len(self.messages)

    @property
    def n(self) -> int:
        return self.block_length

    def _word_key(self, word) -> tuple:
        s = self.alphabets.sigma
        return tuple(s[c] for c in word)

    def canonical_pairs(self) -> list:
        return sorted(self.pairs, key=lambda p: (self._word_key(p[0]), self._word_key(p[1])))

    @cached_property
    def decoder(self) -> dict:
        """Output word -> message."""
        return {y: x for x, y in self.pairs}

    def to_json(self) -> dict:
        return {
            "inputs": list(self.alphabets.inputs),
            "outputs": list(self.alphabets.outputs),
            "block_length": self.block_length,
            "pairs": [[list(x), list(y)] for x, y in self.canonical_pairs()],
            "gamma": str(gamma(self)),
        }


def make_code(alphabets: AlphabetPair, pairs: Iterable) -> Code:
    """Build a code from pairs of words; words may be strings of 1-char symbols."""
    norm = [(tuple(x), tuple(y)) for x, y in pairs]
    if not norm:
        raise InvalidCode("a code needs at least one pair")
    return Code(alphabets, len(norm[0][0]), frozenset(norm))


def code_from_json(data: dict) -> Code:
    try:
        a = AlphabetPair(tuple(data["inputs"]), tuple(data["outputs"]))
        code = make_code(a, [(x, y) for x, y in data["pairs"]])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidCode):
            raise
        raise ParseError(f"bad code JSON: {exc}") from exc
    if "gamma" in data and str(gamma(code)) != str(data["gamma"]):
        raise ParseError("stored gamma does not match the pairs")
    return code


def loads_code(text: str) -> Code:
    try:
        return code_from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid code JSON: {exc}") from exc


def load_code(path) -> Code:
    with open(path) as fh:
        return loads_code(fh.read())


def dumps_code(code: Code) -> str:
    return json.dumps(code.to_json(), indent=2) + "\n"


# --- numbering ---------------------------------------------------------------


def code_word(code: Code) -> tuple:
    """v(C) = x1 y1 x2 y2 ... over the canonical pair order."""
    out: list = []
    for x, y in code.canonical_pairs():
        out.extend(x)
        out.extend(y)
    return tuple(out)


def gamma(code: Code) -> int:
    """Read v(C) as a base-(|X|+|Y|+1) expansion, least significant digit first."""
    a = code.alphabets
    base, sigma = a.base, a.sigma
    value = 0
    for sym in reversed(code_word(code)):
        value = value * base + sigma[sym]
    return value


def _digits(n: int, base: int) -> list[int]:
    out = []
    while n:
        n, d = divmod(n, base)
        out.append(d)
    return out


def gamma_inverse(n: int, alphabets: AlphabetPair) -> Code | None:
    """The code numbered n, or None when n is not the number of any code.

    Rejected: n = 0, a zero digit, no consistent split into X^N Y^N blocks,
    a violated code condition, or pairs not in canonical order (each code has
    exactly one number).
    """
    if n < 1:
        return None
    digits = _digits(n, alphabets.base)
    if 0 in digits:
        return None
    m = len(alphabets.inputs)
    is_input = [d <= m for d in digits]
    total = len(digits)
    candidates = []
    for blk in range(1, total // 2 + 1):
        if total % (2 * blk):
            continue
        ok = True
        for start in range(0, total, 2 * blk):
            if not all(is_input[start : start + blk]) or any(is_input[start + blk : start + 2 * blk]):
                ok = False
                break
        if ok:
            candidates.append(blk)
    if len(candidates) != 1:
        return None
    blk = candidates[0]
    syms = alphabets.symbols
    word = [syms[d - 1] for d in digits]
    pairs = [
        (tuple(word[s : s + blk]), tuple(word[s + blk : s + 2 * blk]))
        for s in range(0, total, 2 * blk)
    ]
    keys = [(tuple(digits[s : s + blk]), tuple(digits[s + blk : s + 2 * blk])) for s in range(0, total, 2 * blk)]
    if any(k1 >= k2 for k1, k2 in zip(keys, keys[1:])):
        return None
    try:
        return Code(alphabets, blk, frozenset(pairs))
    except InvalidCode:
        return None


def theta_n(n: int, alphabets: AlphabetPair) -> int:
    code = gamma_inverse(n, alphabets)
    return 0 if code is None else code.block_length


def theta_m(n: int, alphabets: AlphabetPair) -> int:
    code = gamma_inverse(n, alphabets)
    return 0 if code is None else code.m


# --- zero-error predicate ----------------------------------------------------


def anti_code(code: Code) -> frozenset:
    """(M(C) × Y^N) minus C: the pairs that would be decoded wrongly."""
    outs = list(itertools.product(code.alphabets.outputs, repeat=code.block_length))
    return frozenset((x, y) for x in code.messages for y in outs if (x, y) not in code.pairs)


def _iter_anti_code(code: Code) -> Iterator:
    outs = itertools.product(code.alphabets.outputs, repeat=code.block_length)
    for y in outs:
        for x in code.messages:
            if (x, y) not in code.pairs:
                yield x, y


def is_zero_error(code: Code, pattern: ZeroPattern) -> bool:
    """True iff every anti-code pair has a coordinate j with (x_j, y_j) ∈ Ω."""
    if code.alphabets != pattern.alphabets:
        raise ValueError("code and pattern use different alphabets")
    omega = pattern.omega
    for x, y in _iter_anti_code(code):
        if not any((xj, yj) in omega for xj, yj in zip(x, y)):
            return False
    return True


def delta(n: int, pattern: ZeroPattern) -> int:
    code = gamma_inverse(n, pattern.alphabets)
    return int(code is not None and is_zero_error(code, pattern))


@dataclass(frozen=True)
class ZeroErrorRate:
    """R0 kept as the integer pair (M, N): rate = log2(M)/N when zero_error."""

    m: int
    n: int
    zero_error: bool

    def exceeds(self, base: Fraction) -> bool:
        """R0 > log2(base), i.e. M > base**N for a zero-error code.

        A code that is not zero-error has R0 = 0, which exceeds log2(base)
        only when base < 1.
        """
        base = Fraction(base)
        if not self.zero_error:
            return base < 1
        return self.m * base.denominator ** self.n > base.numerator ** self.n


def rate_r0(code: Code, pattern: ZeroPattern) -> ZeroErrorRate:
    return ZeroErrorRate(code.m, code.block_length, is_zero_error(code, pattern))


def reachable_words(pattern: ZeroPattern, x: tuple) -> list:
    """All y ∈ Y^N with (x_j, y_j) ∉ Ω for every j."""
    return [tuple(y) for y in itertools.product(*(pattern.reachable(s) for s in x))]


def code_from_messages(pattern: ZeroPattern, messages: Iterable) -> Code:
    """Pair each message with every output word it can produce.

    Valid (condition 1 holds) exactly when the messages are pairwise
    non-confusable; the result is then zero-error by construction.
    """
    msgs = [tuple(x) for x in messages]
    if not msgs:
        raise InvalidCode("no messages")
    pairs = []
    for x in msgs:
        ys = reachable_words(pattern, x)
        if not ys:
            raise InvalidCode(f"message {x} reaches no output word")
        pairs.extend((x, y) for y in ys)
    return Code(pattern.alphabets, len(msgs[0]), frozenset(pairs))
