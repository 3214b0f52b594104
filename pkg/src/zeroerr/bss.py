"""Exact interpreter for BSS-computable functions as combinator trees.

Programs are immutable trees over the primitive families: constants and
projections, composition, field addition and multiplication, branching on
``> 0`` and ``= 0``, real-valued primitive recursion and unbounded search.
Reals are modelled by exact rationals; every function built here maps
rational inputs to rational outputs.

Θ_N, Θ_M and Δ enter as opaque :class:`Oracle` nodes backed by
:mod:`zeroerr.codes` instead of being compiled down to combinators.

Evaluation charges one step per node visit and per recursion or search
iteration; exceeding the budget raises :class:`Diverged`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Mapping, Sequence

from .channel import AlphabetPair, all_patterns
from .codes import delta, gamma_inverse
from .errors import ArityMismatch, BSSDomainError, Diverged, ParseError, TableIncomplete
from .exact import Radical, parse_rational

try:  # gmpy2's mpq is ~5x faster than Fraction for the search loops
    from gmpy2 import mpq as _num
except ImportError:  # pragma: no cover
    _num = Fraction

DEFAULT_BUDGET = 1_000_000

_ZERO = _num(0)
_ONE = _num(1)


def _to_num(q) -> "_num":
    q = Fraction(q)
    return _num(q.numerator, q.denominator)


def _to_fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


class _Meter:
    __slots__ = ("left", "budget")

    def __init__(self, budget: int):
        self.budget = budget
        self.left = budget


def _exhausted(meter: _Meter):
    raise Diverged(f"step budget {meter.budget} exhausted", used=meter.budget)


class Program:
    """Base class; subclasses are frozen dataclasses with an ``arity``."""

    arity: int

    @cached_property
    def _fn(self):
        return self._compile()

    def _compile(self):  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, *args, budget: int = DEFAULT_BUDGET) -> Fraction:
        return evaluate(self, args, budget)


@dataclass(frozen=True)
class Const(Program):
    value: Fraction
    arity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "value", parse_rational(self.value))
        if self.arity < 0:
            raise ArityMismatch("negative arity")

    def _compile(self):
        v = _to_num(self.value)

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return v

        return f


@dataclass(frozen=True)
class Proj(Program):
    index: int
    arity: int

    def __post_init__(self):
        if not 0 <= self.index < self.arity:
            raise ArityMismatch(f"projection index {self.index} outside arity {self.arity}")

    def _compile(self):
        i = self.index

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return args[i]

        return f


def _same_arity(*children: Program) -> int:
    arities = {c.arity for c in children}
    if len(arities) != 1:
        raise ArityMismatch(f"children disagree on arity: {sorted(arities)}")
    return arities.pop()


@dataclass(frozen=True)
class Add(Program):
    left: Program
    right: Program
    arity: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "arity", _same_arity(self.left, self.right))

    def _compile(self):
        a, b = self.left._fn, self.right._fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return a(args, m) + b(args, m)

        return f


@dataclass(frozen=True)
class Mul(Program):
    left: Program
    right: Program
    arity: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "arity", _same_arity(self.left, self.right))

    def _compile(self):
        a, b = self.left._fn, self.right._fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return a(args, m) * b(args, m)

        return f


@dataclass(frozen=True)
class BranchPositive(Program):
    """``then`` if test > 0, else ``orelse``."""

    test: Program
    then: Program
    orelse: Program
    arity: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "arity", _same_arity(self.test, self.then, self.orelse))

    def _compile(self):
        t, a, b = self.test._fn, self.then._fn, self.orelse._fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return a(args, m) if t(args, m) > 0 else b(args, m)

        return f


@dataclass(frozen=True)
class BranchZero(Program):
    """``then`` if test = 0, else ``orelse``."""

    test: Program
    then: Program
    orelse: Program
    arity: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "arity", _same_arity(self.test, self.then, self.orelse))

    def _compile(self):
        t, a, b = self.test._fn, self.then._fn, self.orelse._fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return a(args, m) if t(args, m) == 0 else b(args, m)

        return f


@dataclass(frozen=True)
class Compose(Program):
    """outer(inner_1(x), ..., inner_k(x))."""

    outer: Program
    inners: tuple
    arity: int = field(init=False)

    def __post_init__(self):
        inners = tuple(self.inners)
        object.__setattr__(self, "inners", inners)
        if not inners:
            raise ArityMismatch("composition needs at least one inner program")
        if self.outer.arity != len(inners):
            raise ArityMismatch(f"outer arity {self.outer.arity} != {len(inners)} inner programs")
        object.__setattr__(self, "arity", _same_arity(*inners))

    def _compile(self):
        outer = self.outer._fn
        inner = tuple(p._fn for p in self.inners)

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return outer(tuple(g(args, m) for g in inner), m)

        return f


@dataclass(frozen=True)
class PrimRec(Program):
    """B(x) = base(x2..xn) if x1 < 1, else step(x1 - 1, x2..xn, B(x1 - 1, x2..xn))."""

    base: Program
    step: Program
    arity: int = field(init=False)

    def __post_init__(self):
        if self.step.arity != self.base.arity + 2:
            raise ArityMismatch(
                f"step arity {self.step.arity} must be base arity {self.base.arity} + 2"
            )
        object.__setattr__(self, "arity", self.base.arity + 1)

    def _compile(self):
        base, step = self.base._fn, self.step._fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            rest = tuple(args[1:])
            cur = args[0]
            chain = []
            while not cur < 1:
                m.left -= 1
                if m.left < 0:
                    _exhausted(m)
                cur = cur - 1
                chain.append(cur)
            val = base(rest, m)
            for y in reversed(chain):
                val = step((y,) + rest + (val,), m)
            return val

        return f


@dataclass(frozen=True)
class Search(Program):
    """x -> min{y in {0, 1, 2, ...} : body(x, y) = 0}."""

    body: Program
    arity: int = field(init=False)

    def __post_init__(self):
        if self.body.arity < 1:
            raise ArityMismatch("search body needs arity >= 1")
        object.__setattr__(self, "arity", self.body.arity - 1)

    def _compile(self):
        body = self.body._fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            args = tuple(args)
            y = _ZERO
            while True:
                m.left -= 1
                if m.left < 0:
                    _exhausted(m)
                if body(args + (y,), m) == 0:
                    return y
                y = y + 1

        return f


@dataclass(frozen=True, eq=False)
class Oracle(Program):
    """Opaque total-or-partial function on rationals; raises BSSDomainError off its domain."""

    name: str
    fn: Callable
    arity: int

    def _compile(self):
        fn = self.fn

        def f(args, m):
            m.left -= 1
            if m.left < 0:
                _exhausted(m)
            return _to_num(fn(*(_to_fraction(a) for a in args)))

        return f


def evaluate(prog: Program, args: Sequence = (), budget: int = DEFAULT_BUDGET) -> Fraction:
    return evaluate_counted(prog, args, budget)[0]


def evaluate_counted(prog: Program, args: Sequence = (), budget: int = DEFAULT_BUDGET) -> tuple[Fraction, int]:
    """Value and number of steps used."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    args = tuple(args)
    if len(args) != prog.arity:
        raise ArityMismatch(f"program of arity {prog.arity} called with {len(args)} arguments")
    meter = _Meter(budget)
    value = prog._fn(tuple(_to_num(parse_rational(a)) for a in args), meter)
    return _to_fraction(value), budget - meter.left


# --- sugar -------------------------------------------------------------------


def neg(p: Program) -> Program:
    return Mul(Const(-1, p.arity), p)


def sub(a: Program, b: Program) -> Program:
    return Add(a, neg(b))


def branch_nonnegative(test: Program, then: Program, orelse: Program) -> Program:
    """``then`` if test >= 0; derived from the two primitive branches."""
    return BranchPositive(test, then, BranchZero(test, then, orelse))


def balanced_sum(terms: Sequence[Program], arity: int) -> Program:
    if not terms:
        return Const(0, arity)
    terms = list(terms)
    while len(terms) > 1:
        nxt = [Add(terms[i], terms[i + 1]) for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


# --- constructions -----------------------------------------------------------


@lru_cache(maxsize=None)
def program_cl() -> Program:
    """x -> min{n in N : x <= n}, by search on the saturated difference max{x - n, 0}."""
    x, n = Proj(0, 2), Proj(1, 2)
    diff = sub(x, n)
    saturated = BranchPositive(diff, diff, Const(0, 2))
    return Search(saturated)


@lru_cache(maxsize=None)
def program_indicator_nat() -> Program:
    """1 iff x - cl(x) = 0."""
    x = Proj(0, 1)
    return BranchZero(sub(x, program_cl()), Const(1, 1), Const(0, 1))


@lru_cache(maxsize=None)
def program_exp_n() -> Program:
    """(x1, x2) -> x2 ** max{n in N : n <= x1} for x1 >= 0, and 1 otherwise."""
    base = Const(1, 1)
    step = Mul(Proj(1, 3), Proj(2, 3))  # (x1 - 1, x2, previous) -> x2 * previous
    return PrimRec(base, step)


def w0_indicator(alphabets: AlphabetPair, omega: frozenset, arity: int | None = None) -> Program:
    """1 iff w is zero exactly on Ω and positive elsewhere (w in stacking order)."""
    cells = alphabets.cells()
    k = len(cells) if arity is None else arity
    prog: Program = Const(1, k)
    for i in reversed(range(len(cells))):
        coord = Proj(i, k)
        if cells[i] in omega:
            prog = BranchZero(coord, prog, Const(0, k))
        else:
            prog = BranchPositive(coord, prog, Const(0, k))
    return prog


def _table_value(table: Mapping, omega: frozenset) -> Fraction:
    if omega not in table or table[omega] is None:
        raise TableIncomplete(f"no capacity value for pattern {sorted(omega)}")
    v = table[omega]
    if isinstance(v, Radical):
        if not v.is_rational:
            raise TableIncomplete(f"capacity value {v} for {sorted(omega)} is irrational")
        v = v.as_fraction()
    return parse_rational(v)


def program_c0(alphabets: AlphabetPair, table: Mapping) -> Program:
    """w -> sum over Ω of c0(Ω) · 1(w | W0(Ω)), values in the exponentiated domain 2**C0."""
    k = len(alphabets.cells())
    if len(table) < 2 ** k:
        raise TableIncomplete(f"table has {len(table)} entries, {2 ** k} patterns need one")
    terms = []
    for pattern in all_patterns(alphabets):
        value = _table_value(table, pattern.omega)
        terms.append(Mul(Const(value, k), w0_indicator(alphabets, pattern.omega)))
    return balanced_sum(terms, k)


def _natural(x: Fraction, name: str) -> int:
    if x.denominator != 1 or x < 0:
        raise BSSDomainError(f"{name} is only defined on naturals, got {x}")
    return int(x)


def theta_oracles(alphabets: AlphabetPair) -> tuple[Oracle, Oracle]:
    decode = lru_cache(maxsize=8192)(lambda n: gamma_inverse(n, alphabets))

    def tn(x):
        code = decode(_natural(x, "theta_n"))
        return 0 if code is None else code.block_length

    def tm(x):
        code = decode(_natural(x, "theta_m"))
        return 0 if code is None else code.m

    return Oracle("theta_n", tn, 1), Oracle("theta_m", tm, 1)


def delta_oracle(pattern) -> Oracle:
    cached = lru_cache(maxsize=8192)(lambda n: delta(n, pattern))
    return Oracle(f"delta[{len(pattern.omega)}]", lambda x: cached(_natural(x, "delta")), 1)


def _guarded_sum(alphabets: AlphabetPair, theta: Oracle, deltas: Mapping | None) -> Program:
    k = len(alphabets.cells())
    arity = k + 1
    x = Proj(k, arity)
    theta_x = Compose(theta, (x,))
    terms = []
    for pattern in all_patterns(alphabets):
        d = deltas[pattern.omega] if deltas is not None else delta_oracle(pattern)
        term = Mul(Mul(theta_x, Compose(d, (x,))), w0_indicator(alphabets, pattern.omega, arity))
        terms.append(term)
    total = balanced_sum(terms, arity)
    guard = Compose(program_indicator_nat(), (x,))
    return BranchPositive(guard, total, Const(0, arity))


def program_n0(alphabets: AlphabetPair, deltas: Mapping | None = None) -> Program:
    """(w, x) -> N if x numbers a zero-error (N, M)-code for w, else 0."""
    return _guarded_sum(alphabets, theta_oracles(alphabets)[0], deltas)


def program_m0(alphabets: AlphabetPair, deltas: Mapping | None = None) -> Program:
    """(w, x) -> M if x numbers a zero-error (N, M)-code for w, else 0."""
    return _guarded_sum(alphabets, theta_oracles(alphabets)[1], deltas)


def program_min_code_search(mu_tilde, alphabets: AlphabetPair) -> Program:
    """w -> least n whose code is zero-error for w with M > mu_tilde**N.

    ``mu_tilde`` is the exponentiated instability 2**eta as a rational.
    """
    mu_tilde = parse_rational(mu_tilde)
    k = len(alphabets.cells())
    arity = k + 1
    deltas = {p.omega: delta_oracle(p) for p in all_patterns(alphabets)}
    n0 = program_n0(alphabets, deltas)
    m0 = program_m0(alphabets, deltas)
    power = Compose(program_exp_n(), (n0, Const(mu_tilde, arity)))
    b0 = sub(m0, power)
    b00 = BranchPositive(b0, Const(0, arity), Const(1, arity))
    return Search(b00)


# --- S-expressions -----------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def dumps_program(prog: Program) -> str:
    if isinstance(prog, Const):
        return f"(const {prog.value} {prog.arity})"
    if isinstance(prog, Proj):
        return f"(proj {prog.index} {prog.arity})"
    if isinstance(prog, Add):
        return f"(add {dumps_program(prog.left)} {dumps_program(prog.right)})"
    if isinstance(prog, Mul):
        return f"(mul {dumps_program(prog.left)} {dumps_program(prog.right)})"
    if isinstance(prog, BranchPositive):
        return f"(ifpos {dumps_program(prog.test)} {dumps_program(prog.then)} {dumps_program(prog.orelse)})"
    if isinstance(prog, BranchZero):
        return f"(ifzero {dumps_program(prog.test)} {dumps_program(prog.then)} {dumps_program(prog.orelse)})"
    if isinstance(prog, Compose):
        inner = " ".join(dumps_program(p) for p in prog.inners)
        return f"(compose {dumps_program(prog.outer)} {inner})"
    if isinstance(prog, PrimRec):
        return f"(primrec {dumps_program(prog.base)} {dumps_program(prog.step)})"
    if isinstance(prog, Search):
        return f"(search {dumps_program(prog.body)})"
    if isinstance(prog, Oracle):
        return f"(oracle {prog.name} {prog.arity})"
    raise TypeError(f"not a program: {prog!r}")


LIBRARY = {
    "cl": program_cl,
    "indicator-nat": program_indicator_nat,
    "exp-n": program_exp_n,
}


def loads_program(text: str, oracles: Mapping[str, Oracle] | None = None) -> Program:
    """Parse the S-expression form. ``(lib cl)`` names a library program."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            raise ParseError(f"expected {tok!r} at token {pos}")
        pos += 1

    def atom() -> str:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] in "()":
            raise ParseError(f"expected an atom at token {pos}")
        pos += 1
        return tokens[pos - 1]

    def node() -> Program:
        nonlocal pos
        expect("(")
        head = atom()
        try:
            if head == "const":
                out = Const(parse_rational(atom()), int(atom()))
            elif head == "proj":
                out = Proj(int(atom()), int(atom()))
            elif head in ("add", "mul"):
                a, b = node(), node()
                out = Add(a, b) if head == "add" else Mul(a, b)
            elif head in ("ifpos", "ifzero"):
                t, a, b = node(), node(), node()
                out = BranchPositive(t, a, b) if head == "ifpos" else BranchZero(t, a, b)
            elif head == "compose":
                outer = node()
                inners = []
                while pos < len(tokens) and tokens[pos] == "(":
                    inners.append(node())
                out = Compose(outer, tuple(inners))
            elif head == "primrec":
                out = PrimRec(node(), node())
            elif head == "search":
                out = Search(node())
            elif head == "lib":
                name = atom()
                if name not in LIBRARY:
                    raise ParseError(f"unknown library program {name!r}")
                out = LIBRARY[name]()
            elif head == "oracle":
                name, arity = atom(), int(atom())
                if not oracles or name not in oracles:
                    raise ParseError(f"oracle {name!r} is not available")
                out = oracles[name]
                if out.arity != arity:
                    raise ParseError(f"oracle {name!r} has arity {out.arity}, not {arity}")
            else:
                raise ParseError(f"unknown node {head!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc)) from exc
        expect(")")
        return out

    prog = node()
    if pos != len(tokens):
        raise ParseError("trailing tokens after program")
    return prog
