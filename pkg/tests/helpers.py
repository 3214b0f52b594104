"""Random instance generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from zeroerr.channel import AlphabetPair, Channel, validate_channel, word_probability
from zeroerr.codes import Code

AB_CD = AlphabetPair(("a", "b"), ("c", "d"))


def alphabets(nx: int, ny: int) -> AlphabetPair:
    return AlphabetPair(tuple(f"x{i}" for i in range(nx)), tuple(f"y{j}" for j in range(ny)))


def random_row(rng: random.Random, ny: int, zeros=None) -> list:
    """A stochastic row; ``zeros`` picks the zero positions (random if None)."""
    if zeros is None:
        zeros = {j for j in range(ny) if rng.random() < 0.4}
        if len(zeros) == ny:
            zeros.discard(rng.randrange(ny))
    weights = [0 if j in zeros else rng.randint(1, 9) for j in range(ny)]
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def random_channel(rng: random.Random, a: AlphabetPair, p_zero: float = 0.4) -> Channel:
    ny = len(a.outputs)
    rows = []
    for _ in a.inputs:
        zeros = {j for j in range(ny) if rng.random() < p_zero}
        if len(zeros) == ny:
            zeros.discard(rng.randrange(ny))
        rows.append(random_row(rng, ny, zeros))
    return validate_channel(rows, a)


def random_code(rng: random.Random, a: AlphabetPair, n: int, max_messages: int = 4) -> Code:
    """Distinct messages, each with a non-empty set of private output words."""
    inputs = list(itertools.product(a.inputs, repeat=n))
    outputs = list(itertools.product(a.outputs, repeat=n))
    m = rng.randint(1, min(max_messages, len(inputs), len(outputs)))
    messages = rng.sample(inputs, m)
    rng.shuffle(outputs)
    pairs = []
    free = outputs[:]
    for i, x in enumerate(messages):
        left = len(messages) - i - 1
        k = rng.randint(1, max(1, min(3, len(free) - left)))
        for y in free[:k]:
            pairs.append((x, y))
        free = free[k:]
    return Code(a, n, frozenset(pairs))


def brute_s_min(channel: Channel, code: Code) -> Fraction:
    """min over messages of the probability that the decoder returns that message,
    summed over every output word in Y^N."""
    dec = code.decoder
    best = None
    for x in code.messages:
        p = Fraction(0)
        for y in itertools.product(channel.alphabets.outputs, repeat=code.block_length):
            if dec.get(y) == x:
                p += word_probability(channel, x, y)
        best = p if best is None else min(best, p)
    return best


def gamma_by_hand(code: Code) -> int:
    """Σ_j Σ(v_j)·base^(j-1) written out with explicit powers."""
    a = code.alphabets
    word = []
    for x, y in sorted(code.pairs, key=lambda p: ([a.sigma[s] for s in p[0]], [a.sigma[s] for s in p[1]])):
        word += list(x) + list(y)
    return sum(a.sigma[s] * a.base ** j for j, s in enumerate(word))


def all_codes(a: AlphabetPair, n: int):
    """Every code of block length n: each output word goes to at most one input word."""
    inputs = list(itertools.product(a.inputs, repeat=n))
    outputs = list(itertools.product(a.outputs, repeat=n))
    for choice in itertools.product([None, *inputs], repeat=len(outputs)):
        pairs = frozenset((x, y) for x, y in zip(choice, outputs) if x is not None)
        if pairs:
            yield Code(a, n, pairs)


def channel_with_pattern(rng: random.Random, pattern) -> Channel:
    """Random channel whose zeros are exactly the pattern's cells."""
    a = pattern.alphabets
    rows = []
    for x in a.inputs:
        zeros = {j for j, y in enumerate(a.outputs) if (x, y) in pattern.omega}
        rows.append(random_row(rng, len(a.outputs), zeros))
    return validate_channel(rows, a)
