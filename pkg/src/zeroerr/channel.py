"""Finite alphabets, exact discrete memoryless channels and zero patterns.

A channel is stored row-wise, ``rows[i][j] = W(y_j | x_i)``. The flat vector
``w`` used by the BSS programs stacks the same numbers output-major,
input-minor: ``W(y1|x1), ..., W(y1|x_m), W(y2|x1), ...``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import (
    AlphabetOverlap,
    DimensionMismatch,
    EmptyMessageSet,
    NegativeEntry,
    NonStochastic,
    ParseError,
)
from .exact import format_rational, parse_rational

Symbol = str
Word = tuple  # tuple[Symbol, ...]


@dataclass(frozen=True)
class AlphabetPair:
    """Ordered input alphabet X and output alphabet Y, disjoint.

    ``sigma`` numbers the symbols 1..|X| for inputs and |X|+1..|X|+|Y| for
    outputs; the code numbering is a positional expansion in these digits.
    """

    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(str(s) for s in self.inputs))
        object.__setattr__(self, "outputs", tuple(str(s) for s in self.outputs))
        for name, seq in (("input", self.inputs), ("output", self.outputs)):
            if not seq:
                raise DimensionMismatch(f"empty {name} alphabet")
            if len(set(seq)) != len(seq):
                raise DimensionMismatch(f"duplicate symbol in {name} alphabet {seq}")
        common = set(self.inputs) & set(self.outputs)
        if common:
            raise AlphabetOverlap(f"X and Y share symbols {sorted(common)}")

    @cached_property
    def sigma(self) -> dict:
        m = len(self.inputs)
        out = {x: i + 1 for i, x in enumerate(self.inputs)}
        out.update({y: m + j + 1 for j, y in enumerate(self.outputs)})
        return out

    @cached_property
    def symbols(self) -> tuple:
        """Σ⁻¹ as a tuple: ``symbols[k - 1]`` has digit k."""
        return self.inputs + self.outputs

    @property
    def base(self) -> int:
        return len(self.inputs) + len(self.outputs) + 1

    @cached_property
    def input_index(self) -> dict:
        return {x: i for i, x in enumerate(self.inputs)}

    @cached_property
    def output_index(self) -> dict:
        return {y: j for j, y in enumerate(self.outputs)}

    def cells(self) -> list:
        """All (x, y) pairs in stacking order (output-major)."""
        return [(x, y) for y in self.outputs for x in self.inputs]


@dataclass(frozen=True)
class Channel:
    alphabets: AlphabetPair
    rows: tuple  # rows[i][j] = W(y_j | x_i), Fractions

    def prob(self, x: Symbol, y: Symbol) -> Fraction:
        """W(y|x). The notations W(y|x), w(x,y) and w_{x,y} all mean this."""
        a = self.alphabets
        return self.rows[a.input_index[x]][a.output_index[y]]

    @property
    def w(self) -> tuple:
        """Flat stacking: output-major, input-minor."""
        return tuple(self.prob(x, y) for x, y in self.alphabets.cells())

    @classmethod
    def from_flat(cls, w: Sequence, alphabets: AlphabetPair) -> "Channel":
        m = len(alphabets.inputs)
        k = len(alphabets.outputs)
        if len(w) != m * k:
            raise DimensionMismatch(f"expected {m * k} entries, got {len(w)}")
        rows = [[w[j * m + i] for j in range(k)] for i in range(m)]
        return validate_channel(rows, alphabets)

    def to_json(self) -> dict:
        return {
            "inputs": list(self.alphabets.inputs),
            "outputs": list(self.alphabets.outputs),
            "rows": [[format_rational(p) for p in row] for row in self.rows],
        }


@dataclass(frozen=True)
class ZeroPattern:
    """Ω ⊆ X × Y: the transitions that have probability exactly zero."""

    alphabets: AlphabetPair
    omega: frozenset

    def __post_init__(self):
        omega = frozenset((str(x), str(y)) for x, y in self.omega)
        a = self.alphabets
        for x, y in omega:
            if x not in a.input_index or y not in a.output_index:
                raise DimensionMismatch(f"({x}, {y}) is not in X × Y")
        object.__setattr__(self, "omega", omega)

    def __contains__(self, pair) -> bool:
        return pair in self.omega

    def reachable(self, x: Symbol) -> tuple:
        """Outputs y with (x, y) ∉ Ω, in alphabet order."""
        return tuple(y for y in self.alphabets.outputs if (x, y) not in self.omega)

    @property
    def is_realizable(self) -> bool:
        """True iff some channel has exactly this pattern (no all-zero row)."""
        return all(self.reachable(x) for x in self.alphabets.inputs)

    def sorted_pairs(self) -> list:
        a = self.alphabets
        return sorted(self.omega, key=lambda p: (a.input_index[p[0]], a.output_index[p[1]]))

    def to_json(self) -> dict:
        return {
            "inputs": list(self.alphabets.inputs),
            "outputs": list(self.alphabets.outputs),
            "omega": [list(p) for p in self.sorted_pairs()],
        }


def validate_channel(entries, alphabets: AlphabetPair) -> Channel:
    """Build a Channel after exact nonnegativity and row-sum checks."""
    m, k = len(alphabets.inputs), len(alphabets.outputs)
    rows = [list(r) for r in entries]
    if len(rows) != m or any(len(r) != k for r in rows):
        raise DimensionMismatch(f"matrix must be {m} x {k}")
    exact = []
    for i, row in enumerate(rows):
        vals = tuple(parse_rational(v) for v in row)
        for j, v in enumerate(vals):
            if v < 0:
                raise NegativeEntry(
                    f"W({alphabets.outputs[j]}|{alphabets.inputs[i]}) = {v} < 0"
                )
        total = sum(vals, Fraction(0))
        if total != 1:
            raise NonStochastic(f"row {alphabets.inputs[i]} sums to {total}")
        exact.append(vals)
    return Channel(alphabets, tuple(exact))


def zero_pattern(channel: Channel) -> ZeroPattern:
    a = channel.alphabets
    omega = frozenset(
        (x, y)
        for i, x in enumerate(a.inputs)
        for j, y in enumerate(a.outputs)
        if channel.rows[i][j] == 0
    )
    return ZeroPattern(a, omega)


def in_w0(channel: Channel, pattern: ZeroPattern) -> int:
    """Indicator of channel ∈ W0(Ω), by exact zero tests on every entry."""
    if channel.alphabets != pattern.alphabets:
        raise DimensionMismatch("channel and pattern use different alphabets")
    for x, y in channel.alphabets.cells():
        is_zero = channel.prob(x, y) == 0
        if is_zero != ((x, y) in pattern.omega):
            return 0
    return 1


def all_patterns(alphabets: AlphabetPair) -> Iterator[ZeroPattern]:
    """Every Ω ⊆ X × Y, ordered by the bitmask over stacking order."""
    cells = alphabets.cells()
    for mask in range(1 << len(cells)):
        yield ZeroPattern(
            alphabets, frozenset(c for b, c in enumerate(cells) if mask >> b & 1)
        )


def word_probability(channel: Channel, x: Word, y: Word) -> Fraction:
    p = Fraction(1)
    for xi, yi in zip(x, y):
        p *= channel.prob(xi, yi)
        if not p:
            break
    return p


def s_min(channel: Channel, code) -> Fraction:
    """Minimum over messages of the probability that the message is decoded.

    ``code`` is a :class:`zeroerr.codes.Code`; for each message x the sum
    runs over the output words paired with x in the code.
    """
    if channel.alphabets != code.alphabets:
        raise DimensionMismatch("code and channel use different alphabets")
    by_message: dict = {}
    for x, y in code.pairs:
        by_message.setdefault(x, Fraction(0))
        by_message[x] += word_probability(channel, x, y)
    if not by_message:
        raise EmptyMessageSet("code has no messages")
    return min(by_message.values())


# --- file format -------------------------------------------------------------


def channel_from_json(data: dict) -> Channel:
    try:
        alphabets = AlphabetPair(tuple(data["inputs"]), tuple(data["outputs"]))
        rows = data["rows"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"channel JSON needs inputs/outputs/rows: {exc}") from exc
    return validate_channel(rows, alphabets)


def loads_channel(text: str) -> Channel:
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid channel JSON: {exc}") from exc
    return channel_from_json(data)


def dumps_channel(channel: Channel) -> str:
    return json.dumps(channel.to_json(), indent=2) + "\n"


def load_channel(path) -> Channel:
    with open(path) as fh:
        return loads_channel(fh.read())


# --- stock channels ----------------------------------------------------------


def noiseless(m: int, inputs: Iterable[str] | None = None, outputs: Iterable[str] | None = None) -> Channel:
    xs = tuple(inputs) if inputs is not None else tuple(f"x{i}" for i in range(m))
    ys = tuple(outputs) if outputs is not None else tuple(f"y{i}" for i in range(m))
    rows = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    return validate_channel(rows, AlphabetPair(xs, ys))


def binary_symmetric(p, inputs=("a", "b"), outputs=("c", "d")) -> Channel:
    p = parse_rational(p)
    return validate_channel([[1 - p, p], [p, 1 - p]], AlphabetPair(inputs, outputs))


def typewriter(m: int = 5) -> Channel:
    """Input i reaches outputs i and i+1 (mod m) with probability 1/2 each."""
    xs = tuple(f"x{i}" for i in range(m))
    ys = tuple(f"y{i}" for i in range(m))
    half = Fraction(1, 2)
    rows = [[half if j in (i, (i + 1) % m) else Fraction(0) for j in range(m)] for i in range(m)]
    return validate_channel(rows, AlphabetPair(xs, ys))


def common_denominator(channel: Channel) -> int:
    return math.lcm(*(p.denominator for row in channel.rows for p in row))


def output_words(alphabets: AlphabetPair, n: int) -> Iterator[Word]:
    return itertools.product(alphabets.outputs, repeat=n)


def input_words(alphabets: AlphabetPair, n: int) -> Iterator[Word]:
    return itertools.product(alphabets.inputs, repeat=n)
