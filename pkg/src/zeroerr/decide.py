"""Instability exponent of a plant and the solvability decision.

Everything lives in the exponentiated domain: instead of η(A) we bracket
2**η(A) = ∏_{|λ|>=1} |λ| by rationals, and instead of C0 we use the
graph bounds on 2**C0 (α(G^⊠n)**(1/n) from below, the clique-cover number
from above). All comparisons are cross-multiplied integers.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy

from .channel import Channel, zero_pattern
from .codes import code_from_messages, is_zero_error
from .errors import DimensionMismatch, ParseError, PrecisionExhausted
from .exact import Radical, format_rational, parse_rational, power_exceeds, sqrt_bounds
from .graphs import (
    DEFAULT_VERTEX_LIMIT,
    CapacityBound,
    capacity_bounds,
    confusability_graph,
    strong_power,
)

DEFAULT_PRECISION = 30
MAX_DPS = 4000


@dataclass(frozen=True)
class Plant:
    matrix: tuple  # tuple of row tuples of Fractions
    eigen_moduli: tuple | None = None  # optional ((lo, hi), ...) per eigenvalue

    def __post_init__(self):
        rows = tuple(tuple(parse_rational(v) for v in row) for row in self.matrix)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionMismatch("plant matrix must be square and non-empty")
        object.__setattr__(self, "matrix", rows)
        if self.eigen_moduli is not None:
            mods = tuple((parse_rational(lo), parse_rational(hi)) for lo, hi in self.eigen_moduli)
            if len(mods) != n:
                raise DimensionMismatch(f"{len(mods)} eigenvalue intervals for a {n}x{n} plant")
            if any(lo < 0 or lo > hi for lo, hi in mods):
                raise ParseError("eigenvalue modulus intervals need 0 <= lo <= hi")
            object.__setattr__(self, "eigen_moduli", mods)

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    @classmethod
    def scalar(cls, a) -> "Plant":
        return cls(((parse_rational(a),),))

    def to_json(self) -> dict:
        out: dict = {"matrix": [[format_rational(v) for v in row] for row in self.matrix]}
        if self.eigen_moduli is not None:
            out["eigen_moduli"] = [[format_rational(lo), format_rational(hi)] for lo, hi in self.eigen_moduli]
        return out


def plant_from_json(data: dict) -> Plant:
    try:
        return Plant(tuple(tuple(r) for r in data["matrix"]), data.get("eigen_moduli"))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"plant JSON needs a matrix: {exc}") from exc


def loads_plant(text: str) -> Plant:
    try:
        return plant_from_json(json.loads(text, parse_float=Fraction))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid plant JSON: {exc}") from exc


def load_plant(path) -> Plant:
    with open(path) as fh:
        return loads_plant(fh.read())


# --- instability exponent ----------------------------------------------------


@dataclass(frozen=True)
class InstabilityExponent:
    """Rational bracket lo <= 2**η(A) <= hi."""

    lo: Fraction
    hi: Fraction
    boundary_flag: bool = False
    exact: bool = False

    def __post_init__(self):
        if not 0 < self.lo <= self.hi:
            raise ValueError(f"bad exponent interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value) -> "InstabilityExponent":
        v = parse_rational(value)
        return cls(v, v, False, True)

    def to_json(self) -> dict:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "boundary_flag": self.boundary_flag,
            "exact": self.exact,
        }

    @classmethod
    def from_json(cls, data: dict) -> "InstabilityExponent":
        return cls(
            parse_rational(data["lo"]),
            parse_rational(data["hi"]),
            bool(data.get("boundary_flag", False)),
            bool(data.get("exact", False)),
        )


def _mpf_fraction(x, dps: int) -> Fraction:
    # approximations only need to be close; the disc test certifies them
    return Fraction(mpmath.nstr(x, dps + 5, min_fixed=-mpmath.inf, max_fixed=mpmath.inf))


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _cabs2(a) -> Fraction:
    return a[0] * a[0] + a[1] * a[1]


def _horner(coeffs: Sequence[Fraction], z) -> tuple:
    acc = (Fraction(0), Fraction(0))
    for c in coeffs:
        acc = _cmul(acc, z)
        acc = (acc[0] + c, acc[1])
    return acc


def _root_modulus_intervals(coeffs: Sequence[Fraction], dps: int) -> list | None:
    """Certified [lo, hi] for each root modulus of a squarefree polynomial.

    Approximate roots come from mpmath; Smith's bound gives discs
    |λ - z_i| <= n |f(z_i)| / |a ∏_{j≠i}(z_i - z_j)| that contain all
    roots, and when the discs are pairwise disjoint each holds exactly one.
    Returns None when the discs overlap (more precision needed).
    """
    deg = len(coeffs) - 1
    with mpmath.workdps(dps):
        approx = mpmath.polyroots([mpmath.mpf(c.numerator) / c.denominator for c in coeffs],
                                  maxsteps=200 + 20 * deg, extraprec=2 * dps)
        zs = [(_mpf_fraction(mpmath.re(z), dps), _mpf_fraction(mpmath.im(z), dps)) for z in approx]
    lead2 = coeffs[0] ** 2
    bits = int(dps * 3.33) + 16
    radii = []
    for i, z in enumerate(zs):
        denom = lead2
        for j, w in enumerate(zs):
            if j != i:
                denom *= _cabs2((z[0] - w[0], z[1] - w[1]))
        if denom == 0:
            return None
        r2 = deg * deg * _cabs2(_horner(coeffs, z)) / denom
        radii.append(sqrt_bounds(r2, bits)[1])
    for i in range(deg):
        for j in range(i + 1, deg):
            d2 = _cabs2((zs[i][0] - zs[j][0], zs[i][1] - zs[j][1]))
            if (radii[i] + radii[j]) ** 2 >= d2:
                return None
    out = []
    for z, r in zip(zs, radii):
        mlo, mhi = sqrt_bounds(_cabs2(z), bits)
        out.append((max(Fraction(0), mlo - r), mhi + r))
    return out


def _factor_contribution(coeffs: list[Fraction], dps: int):
    """(lo, hi, exact, boundary) bracketing ∏ max(|λ|, 1) over the roots of one irreducible factor."""
    deg = len(coeffs) - 1
    a = coeffs[0]
    if deg == 1:
        m = abs(coeffs[1] / a)
        v = max(m, Fraction(1))
        return v, v, True, m == 1
    if deg == 2:
        b, c = coeffs[1] / a, coeffs[2] / a
        if b * b < 4 * c:  # complex pair, |λ|² = c
            v = max(c, Fraction(1))
            return v, v, True, c == 1
    intervals = _root_modulus_intervals(coeffs, dps)
    if intervals is None:
        return None
    const = abs(coeffs[-1] / a)
    if all(lo > 1 for lo, _ in intervals):
        return const, const, True, False
    if all(hi < 1 for _, hi in intervals):
        return Fraction(1), Fraction(1), True, False
    lo_p, hi_p, boundary = Fraction(1), Fraction(1), False
    for lo, hi in intervals:
        lo_p *= max(lo, Fraction(1))
        hi_p *= max(hi, Fraction(1))
        if lo <= 1 <= hi:
            boundary = True
    return lo_p, hi_p, False, boundary


def _ratio_ok(lo: Fraction, hi: Fraction, precision: int) -> bool:
    return hi * (1 << precision) <= lo * ((1 << precision) + 1)


def instability_exponent(plant: Plant, precision: int = DEFAULT_PRECISION) -> InstabilityExponent:
    """Certified bracket on ∏_{|λ|>=1} |λ| with hi/lo <= 1 + 2**-precision."""
    if plant.eigen_moduli is not None:
        lo_p, hi_p, boundary = Fraction(1), Fraction(1), False
        for lo, hi in plant.eigen_moduli:
            lo_p *= max(lo, Fraction(1))
            hi_p *= max(hi, Fraction(1))
            boundary = boundary or lo <= 1 <= hi
        return InstabilityExponent(lo_p, hi_p, boundary, lo_p == hi_p)

    x = sympy.Symbol("x")
    mat = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in plant.matrix])
    poly = mat.charpoly(x)
    _, factors = sympy.factor_list(poly.as_expr(), x, domain="QQ")
    facs = []
    for f, mult in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in sympy.Poly(f, x).all_coeffs()]
        facs.append((coeffs, mult))

    dps = max(30, int(precision * 0.31) + 20)
    while dps <= MAX_DPS:
        lo_t, hi_t, exact, boundary, ok = Fraction(1), Fraction(1), True, False, True
        for coeffs, mult in facs:
            part = _factor_contribution(coeffs, dps)
            if part is None:
                ok = False
                break
            lo, hi, ex, bd = part
            lo_t *= lo ** mult
            hi_t *= hi ** mult
            exact = exact and ex
            boundary = boundary or bd
        if ok and _ratio_ok(lo_t, hi_t, precision):
            return InstabilityExponent(lo_t, hi_t, boundary, exact and lo_t == hi_t)
        dps *= 2
    raise PrecisionExhausted(f"could not certify eigenvalue moduli to 2^-{precision}", used=MAX_DPS)


# --- verdicts ----------------------------------------------------------------


class Outcome(str, enum.Enum):
    SOLVABLE = "SOLVABLE"
    UNSOLVABLE = "UNSOLVABLE"
    BOUNDARY = "BOUNDARY"
    UNDETERMINED_BOUNDS = "UNDETERMINED_BOUNDS"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    exponent: InstabilityExponent
    bounds: CapacityBound
    certificate: dict = field(default_factory=dict)
    code: object = None  # a Code for alpha-certified SOLVABLE verdicts

    @property
    def exact_tie(self) -> bool:
        return bool(self.certificate.get("exact_tie", False))

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "base": self.exponent.to_json(),
            "capacity": self.bounds.to_json(),
            "certificate": self.certificate,
            "code": None if self.code is None else self.code.to_json(),
        }


def _word_list(words) -> list:
    return [list(w) for w in words]


def decide_solvability(
    plant: Plant,
    channel: Channel,
    depth: int = 2,
    precision: int = DEFAULT_PRECISION,
    vertex_limit: int = DEFAULT_VERTEX_LIMIT,
    exponent: InstabilityExponent | None = None,
) -> Verdict:
    """Compare 2**η(A) with the capacity bracket of the channel's zero pattern."""
    exp = instability_exponent(plant, precision) if exponent is None else exponent
    pattern = zero_pattern(channel)
    bounds = capacity_bounds(pattern, depth, vertex_limit)
    lo, hi = exp.lo, exp.hi

    for n, (alpha, witness) in enumerate(zip(bounds.alphas, bounds.witnesses), start=1):
        if power_exceeds(alpha, hi, n):
            code = code_from_messages(pattern, witness)
            cert = {
                "kind": "alpha",
                "n": n,
                "alpha": alpha,
                "hi": format_rational(hi),
                "lhs": str(alpha * hi.denominator ** n),
                "rhs": str(hi.numerator ** n),
                "witness": _word_list(witness),
            }
            return Verdict(Outcome.SOLVABLE, exp, bounds, cert, code)

    k = bounds.upper
    if k < lo:
        cert = {
            "kind": "clique-cover",
            "cover_size": k,
            "lo": format_rational(lo),
            "lhs": str(k * lo.denominator),
            "rhs": str(lo.numerator),
            "cover": [[str(v) for v in c] for c in bounds.cover],
        }
        return Verdict(Outcome.UNSOLVABLE, exp, bounds, cert)

    if bounds.exact is not None:
        cap = bounds.exact
        base_cert = {"capacity": str(cap), "provenance": bounds.provenance, "table_name": bounds.table_name}
        if cap > hi:
            return Verdict(Outcome.SOLVABLE, exp, bounds, {"kind": "exact-capacity", "hi": format_rational(hi), **base_cert})
        if cap < lo:
            return Verdict(Outcome.UNSOLVABLE, exp, bounds, {"kind": "exact-capacity", "lo": format_rational(lo), **base_cert})
        tie = exp.exact and cap == lo
        cert = {"kind": "boundary", "lo": format_rational(lo), "hi": format_rational(hi), "exact_tie": tie, **base_cert}
        return Verdict(Outcome.BOUNDARY, exp, bounds, cert)

    a, n = bounds.lower
    cert = {
        "kind": "gap",
        "lower": {"alpha": a, "n": n},
        "upper": k,
        "lo": format_rational(lo),
        "hi": format_rational(hi),
    }
    return Verdict(Outcome.UNDETERMINED_BOUNDS, exp, bounds, cert)


def verify_verdict(verdict: Verdict, channel: Channel) -> bool:
    """Re-check the certificate from scratch; True iff it holds exactly."""
    cert = verdict.certificate
    exp = verdict.exponent
    pattern = zero_pattern(channel)
    g = confusability_graph(pattern)
    kind = cert.get("kind")
    if verdict.outcome is Outcome.SOLVABLE and kind == "alpha":
        n, alpha = cert["n"], cert["alpha"]
        hi = parse_rational(cert["hi"])
        witness = [tuple(w) for w in cert["witness"]]
        if hi != exp.hi or len(set(witness)) != alpha:
            return False
        if not strong_power(g, n).is_independent(witness):
            return False
        if alpha * hi.denominator ** n <= hi.numerator ** n:
            return False
        code = verdict.code
        if code is None or not is_zero_error(code, pattern):
            return False
        return code.block_length == n and power_exceeds(code.m, hi, n)
    if verdict.outcome is Outcome.UNSOLVABLE and kind == "clique-cover":
        lo = parse_rational(cert["lo"])
        cover = cert["cover"]
        covered = [v for c in cover for v in c]
        if sorted(covered) != sorted(str(v) for v in g.vertices):
            return False
        if not all(g.is_clique(c) for c in cover):
            return False
        return lo == exp.lo and len(cover) * lo.denominator < lo.numerator
    if kind in ("exact-capacity", "boundary"):
        cap = Radical.parse(cert["capacity"])
        if verdict.bounds.exact is None or cap != verdict.bounds.exact:
            return False
        if not verdict.bounds.lower_radical() <= cap <= verdict.bounds.upper:
            return False
        if verdict.outcome is Outcome.SOLVABLE:
            return cap > exp.hi
        if verdict.outcome is Outcome.UNSOLVABLE:
            return cap < exp.lo
        return exp.lo <= cap <= exp.hi
    if verdict.outcome is Outcome.UNDETERMINED_BOUNDS:
        a, n = cert["lower"]["alpha"], cert["lower"]["n"]
        # neither route applies: α**(1/n) <= hi and upper >= lo
        return not power_exceeds(a, exp.hi, n) and cert["upper"] >= exp.lo
    return False


def indicator_s(plant: Plant, channel: Channel, depth: int = 2, **kw) -> int | None:
    """1 if C0 > η(A), 0 if not, None when the bounds cannot tell."""
    return _indicator(decide_solvability(plant, channel, depth, **kw), Outcome.SOLVABLE)


def indicator_u(plant: Plant, channel: Channel, depth: int = 2, **kw) -> int | None:
    """1 if C0 < η(A), 0 if not, None when the bounds cannot tell."""
    return _indicator(decide_solvability(plant, channel, depth, **kw), Outcome.UNSOLVABLE)


def _indicator(verdict: Verdict, target: Outcome) -> int | None:
    if verdict.outcome in (Outcome.SOLVABLE, Outcome.UNSOLVABLE):
        return int(verdict.outcome is target)
    if verdict.outcome is Outcome.BOUNDARY and verdict.exact_tie:
        return 0
    return None


def verdict_from_json(data: dict) -> Verdict:
    """Rebuild a Verdict from its JSON; enough to re-run verify_verdict."""
    from .codes import code_from_json

    try:
        cap = data["capacity"]
        cert = data["certificate"]
        exact = cap.get("exact")
        bounds = CapacityBound(
            alphas=tuple(a["alpha"] for a in cap["alphas"]),
            witnesses=(),
            upper=int(cap["upper"]),
            cover=tuple(tuple(c) for c in cert.get("cover", ())),
            exact=None if exact is None else Radical.parse(exact),
            provenance=cap["provenance"],
            table_name=cert.get("table_name", ""),
        )
        code = data.get("code")
        return Verdict(
            Outcome(data["outcome"]),
            InstabilityExponent.from_json(data["base"]),
            bounds,
            cert,
            None if code is None else code_from_json(code),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad verdict JSON: {exc}") from exc
