"""Confusability graphs, strong powers, independence and clique-cover numbers.

Graphs are small (tens of vertices) so everything runs on Python-int
bitmasks: ``adj[i]`` has bit j set iff vertices i and j are adjacent.
Vertex order is part of the value and is the tie-break order everywhere.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from importlib import resources
from typing import Hashable, Iterable, Sequence

from .channel import AlphabetPair, ZeroPattern
from .errors import ParseError, TooLarge
from .exact import Radical

DEFAULT_VERTEX_LIMIT = 64
EXHAUSTIVE_LIMIT = 20
CANONICAL_LIMIT = 10


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: frozenset  # of frozenset({u, v})

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertex")
        vs = set(verts)
        edges = set()
        for e in self.edges:
            e = frozenset(e)
            if len(e) != 2:
                raise ValueError(f"self-loop or malformed edge {set(e)}")
            if not e <= vs:
                raise ValueError(f"edge {set(e)} references unknown vertex")
            edges.add(e)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def from_masks(cls, vertices: Sequence, adj: Sequence[int]) -> "Graph":
        verts = tuple(vertices)
        edges = {
            frozenset((verts[i], verts[j]))
            for i in range(len(verts))
            for j in range(i + 1, len(verts))
            if adj[i] >> j & 1
        }
        g = cls(verts, frozenset(edges))
        g.__dict__["adj"] = tuple(adj)
        return g

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(tuple(range(n)), frozenset())

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(tuple(range(n)), frozenset(frozenset(p) for p in itertools.combinations(range(n), 2)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(tuple(range(n)), frozenset(frozenset((i, (i + 1) % n)) for i in range(n)))

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adj(self) -> tuple:
        masks = [0] * len(self.vertices)
        idx = self.index
        for e in self.edges:
            u, v = tuple(e)
            i, j = idx[u], idx[v]
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def adjacent(self, u, v) -> bool:
        return bool(self.adj[self.index[u]] >> self.index[v] & 1)

    def is_independent(self, vertices: Iterable) -> bool:
        idx = [self.index[v] for v in vertices]
        if len(set(idx)) != len(idx):
            return False
        mask = 0
        for i in idx:
            mask |= 1 << i
        return all(not (self.adj[i] & mask) for i in idx)

    def is_clique(self, vertices: Iterable) -> bool:
        idx = [self.index[v] for v in vertices]
        return all(self.adj[i] >> j & 1 for i, j in itertools.combinations(idx, 2))

    # --- export -------------------------------------------------------------

    def labels(self) -> list:
        return [vertex_label(v) for v in self.vertices]

    def to_adjacency_json(self) -> dict:
        labels = self.labels()
        return {
            "vertices": labels,
            "adjacency": {
                labels[i]: [labels[j] for j in range(len(labels)) if self.adj[i] >> j & 1]
                for i in range(len(labels))
            },
        }

    def to_dimacs(self) -> str:
        n = len(self.vertices)
        lines = [f"c vertex {i + 1} {lab}" for i, lab in enumerate(self.labels())]
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if self.adj[i] >> j & 1]
        lines.append(f"p edge {n} {len(pairs)}")
        lines += [f"e {i + 1} {j + 1}" for i, j in pairs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_adjacency_json(cls, data: dict) -> "Graph":
        try:
            verts = tuple(data["vertices"])
            adjacency = data["adjacency"]
            edges = {frozenset((u, v)) for u, nbrs in adjacency.items() for v in nbrs}
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"bad adjacency JSON: {exc}") from exc
        return cls(verts, frozenset(edges))

    @classmethod
    def from_dimacs(cls, text: str) -> "Graph":
        n = None
        labels: dict = {}
        edges = set()
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "c" and len(parts) >= 4 and parts[1] == "vertex":
                labels[int(parts[2]) - 1] = " ".join(parts[3:])
            elif parts[0] == "p":
                n = int(parts[2])
            elif parts[0] == "e":
                edges.add((int(parts[1]) - 1, int(parts[2]) - 1))
        if n is None:
            raise ParseError("DIMACS text lacks a 'p edge' line")
        verts = tuple(labels.get(i, str(i + 1)) for i in range(n))
        return cls(verts, frozenset(frozenset((verts[i], verts[j])) for i, j in edges))


def vertex_label(v: Hashable) -> str:
    if isinstance(v, tuple):
        return ",".join(vertex_label(u) for u in v)
    return str(v)


def confusability_graph(pattern: ZeroPattern) -> Graph:
    """Inputs u ~ v iff some output y has (u, y) ∉ Ω and (v, y) ∉ Ω."""
    a = pattern.alphabets
    reach = [set(pattern.reachable(x)) for x in a.inputs]
    n = len(a.inputs)
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if reach[i] & reach[j]:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return Graph.from_masks(a.inputs, adj)


def strong_product(g: Graph, h: Graph) -> Graph:
    """Vertices are pairs; distinct pairs are adjacent iff each coordinate is equal or adjacent."""
    closed_g = [m | (1 << i) for i, m in enumerate(g.adj)]
    closed_h = [m | (1 << i) for i, m in enumerate(h.adj)]
    ng, nh = len(g), len(h)
    verts = [(u, v) for u in g.vertices for v in h.vertices]
    adj = []
    for i in range(ng):
        for j in range(nh):
            mask = 0
            for k in range(ng):
                if closed_g[i] >> k & 1:
                    row = closed_h[j] << (k * nh)
                    mask |= row
            mask &= ~(1 << (i * nh + j))
            adj.append(mask)
    return Graph.from_masks(verts, adj)


def strong_power(g: Graph, n: int, vertex_limit: int | None = None) -> Graph:
    """n-fold strong power; vertices are n-tuples of g's vertices."""
    if n < 1:
        raise ValueError("power must be >= 1")
    if vertex_limit is not None and len(g) ** n > vertex_limit:
        raise TooLarge(f"G^{n} has {len(g) ** n} vertices > limit {vertex_limit}")
    base = Graph.from_masks(tuple((v,) for v in g.vertices), g.adj)
    out = base
    for _ in range(n - 1):
        prod = strong_product(out, g)
        verts = tuple(u + (v,) for u, v in prod.vertices)
        out = Graph.from_masks(verts, prod.adj)
    return out


# --- independence number -----------------------------------------------------


def _greedy_clique_cover_size(adj: Sequence[int], cand: int) -> int:
    count = 0
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        clique_cand = cand & adj[v]
        cand &= ~low
        while clique_cand:
            lw = clique_cand & -clique_cand
            w = lw.bit_length() - 1
            cand &= ~lw
            clique_cand &= adj[w]
        count += 1
    return count


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mis_branch_and_bound(adj: Sequence[int], n: int) -> int:
    best = [0, 0]  # size, mask

    def expand(cand: int, chosen: int, size: int) -> None:
        # vertices of degree <= 1 in G[cand] belong to some maximum set
        changed = True
        while changed and cand:
            changed = False
            for v in _bits(cand):
                if (adj[v] & cand).bit_count() <= 1:
                    chosen |= 1 << v
                    cand &= ~((1 << v) | adj[v])
                    size += 1
                    changed = True
                    break
        if not cand:
            if size > best[0]:
                best[0], best[1] = size, chosen
            return
        if size + _greedy_clique_cover_size(adj, cand) <= best[0]:
            return
        pivot, top = -1, -1
        for v in _bits(cand):
            d = (adj[v] & cand).bit_count()
            if d > top:
                pivot, top = v, d
        expand(cand & ~((1 << pivot) | adj[pivot]), chosen | (1 << pivot), size + 1)
        expand(cand & ~(1 << pivot), chosen, size)

    expand((1 << n) - 1, 0, 0)
    return best[1]


def independence_number(g: Graph, vertex_limit: int = DEFAULT_VERTEX_LIMIT) -> tuple[int, tuple]:
    """Exact α(G) by branch and bound, with one maximum independent set."""
    if len(g) > vertex_limit:
        raise TooLarge(f"{len(g)} vertices > limit {vertex_limit}")
    mask = _mis_branch_and_bound(g.adj, len(g))
    witness = tuple(g.vertices[i] for i in _bits(mask))
    return len(witness), witness


def independence_number_exhaustive(g: Graph, limit: int = EXHAUSTIVE_LIMIT) -> tuple[int, tuple]:
    """α(G) by visiting every independent set; the oracle for small graphs."""
    n = len(g)
    if n > limit:
        raise TooLarge(f"{n} vertices > exhaustive limit {limit}")
    adj = g.adj
    best = [0, 0]

    def visit(start: int, chosen: int, blocked: int, size: int) -> None:
        if size > best[0]:
            best[0], best[1] = size, chosen
        for v in range(start, n):
            if not (blocked >> v & 1):
                visit(v + 1, chosen | (1 << v), blocked | adj[v] | (1 << v), size + 1)

    visit(0, 0, 0, 0)
    return best[0], tuple(g.vertices[i] for i in _bits(best[1]))


# --- clique cover ------------------------------------------------------------


def clique_cover_number(g: Graph, vertex_limit: int = DEFAULT_VERTEX_LIMIT) -> tuple[int, tuple]:
    """Exact minimum number of cliques partitioning V, with a witness partition."""
    n = len(g)
    if n > vertex_limit:
        raise TooLarge(f"{n} vertices > limit {vertex_limit}")
    if n == 0:
        return 0, ()
    adj = g.adj
    # colour the complement: each colour class is a clique of g
    order = sorted(range(n), key=lambda v: (adj[v].bit_count(), v))
    alpha = independence_number(g, vertex_limit)[0]

    def greedy() -> list[int]:
        classes: list[int] = []
        for v in order:
            for k, cls in enumerate(classes):
                if cls & ~adj[v] == 0:
                    classes[k] |= 1 << v
                    break
            else:
                classes.append(1 << v)
        return classes

    best = greedy()

    def colourable(k: int) -> list[int] | None:
        classes = [0] * k

        def place(pos: int, used: int) -> bool:
            if pos == n:
                return True
            v = order[pos]
            for c in range(min(used + 1, k)):
                if classes[c] & ~adj[v] == 0:
                    classes[c] |= 1 << v
                    if place(pos + 1, max(used, c + 1)):
                        return True
                    classes[c] &= ~(1 << v)
            return False

        return list(classes) if place(0, 0) else None

    for k in range(alpha, len(best)):
        found = colourable(k)
        if found is not None:
            best = found
            break
    cover = tuple(tuple(g.vertices[i] for i in _bits(c)) for c in best if c)
    return len(cover), cover


# --- canonical forms and the known-values registry ---------------------------


def canonical_form(g: Graph) -> tuple[int, tuple]:
    """Isomorphism-invariant key: vertex count plus the lexicographically
    least lower-triangular adjacency bit string over degree-sorted orderings."""
    n = len(g)
    if n > CANONICAL_LIMIT:
        raise TooLarge(f"canonical form limited to {CANONICAL_LIMIT} vertices")
    adj = g.adj
    deg = [adj[v].bit_count() for v in range(n)]
    target = sorted(deg)
    best: list = [None]

    def twins(u: int, v: int) -> bool:
        # swapping u and v is an automorphism, so one subtree suffices
        mask = ~((1 << u) | (1 << v))
        return adj[u] & mask == adj[v] & mask

    def rec(order: list, remaining: int, code: tuple) -> None:
        k = len(order)
        if k == n:
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        tried: list = []
        for v in _bits(remaining):
            if deg[v] != target[k]:
                continue
            if any(twins(u, v) for u in tried):
                continue
            tried.append(v)
            row = tuple(adj[v] >> u & 1 for u in order)
            new = code + row
            if best[0] is not None:
                ref = best[0][: len(new)]
                if new > ref:
                    continue
            order.append(v)
            rec(order, remaining & ~(1 << v), new)
            order.pop()

    rec([], (1 << n) - 1, ())
    return n, best[0]


def _graph_from_record(rec: dict) -> Graph:
    n = int(rec["vertices"])
    return Graph(tuple(range(n)), frozenset(frozenset(e) for e in rec["edges"]))


@dataclass
class CapacityRegistry:
    """Known exact values of 2**C0 keyed by canonical graph form."""

    entries: dict = field(default_factory=dict)
    names: dict = field(default_factory=dict)

    def add(self, g: Graph, value: Radical, name: str = "") -> None:
        key = canonical_form(g)
        self.entries[key] = value
        self.names[key] = name

    def lookup(self, g: Graph) -> tuple[Radical, str] | None:
        if len(g) > CANONICAL_LIMIT:
            return None
        key = canonical_form(g)
        if key in self.entries:
            return self.entries[key], self.names.get(key, "")
        return None

    @classmethod
    def from_json(cls, data) -> "CapacityRegistry":
        reg = cls()
        try:
            for rec in data["records"]:
                reg.add(_graph_from_record(rec), Radical.parse(rec["value"]), rec.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad capacity registry: {exc!r}") from exc
        return reg

    @classmethod
    def load(cls, path=None) -> "CapacityRegistry":
        if path is None:
            text = resources.files("zeroerr").joinpath("data/known_capacities.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid registry JSON: {exc}") from exc
        return cls.from_json(data)


@lru_cache(maxsize=1)
def default_registry() -> CapacityRegistry:
    return CapacityRegistry.load()


# --- capacity bounds ---------------------------------------------------------


@dataclass(frozen=True)
class CapacityBound:
    """Certified bracket on 2**C0 for one confusability graph.

    ``alphas[n-1] = α(G^⊠n)``; the lower bound is the best α(G^⊠n)**(1/n),
    kept as the integer pair (α, n). ``upper`` is the clique-cover number.
    """

    alphas: tuple
    witnesses: tuple
    upper: int
    cover: tuple
    exact: Radical | None
    provenance: str  # perfect-match | table | bounds-only
    table_name: str = ""

    @property
    def lower(self) -> tuple[int, int]:
        best_n, best_a = 1, self.alphas[0]
        for n, a in enumerate(self.alphas, start=1):
            # a**(1/n) > best_a**(1/best_n)
            if a ** best_n > best_a ** n:
                best_n, best_a = n, a
        return best_a, best_n

    def lower_radical(self) -> Radical:
        a, n = self.lower
        return Radical(Fraction(a), n)

    def check(self) -> bool:
        """Every α(G^⊠n) <= upper**n and exact (if any) lies in [lower, upper]."""
        ok = all(a <= self.upper ** n for n, a in enumerate(self.alphas, start=1))
        if self.exact is not None:
            ok = ok and self.lower_radical() <= self.exact <= self.upper
        return ok

    def to_json(self) -> dict:
        a, n = self.lower
        return {
            "lower": {"alpha": a, "n": n},
            "alphas": [{"n": k, "alpha": v} for k, v in enumerate(self.alphas, start=1)],
            "upper": self.upper,
            "exact": None if self.exact is None else str(self.exact),
            "provenance": self.provenance,
        }


def capacity_bounds_for_graph(
    g: Graph,
    depth: int = 2,
    vertex_limit: int = DEFAULT_VERTEX_LIMIT,
    registry: CapacityRegistry | None = None,
) -> CapacityBound:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    alphas, witnesses = [], []
    for n in range(1, depth + 1):
        power = strong_power(g, n, vertex_limit)
        a, w = independence_number(power, vertex_limit)
        alphas.append(a)
        witnesses.append(w)
    upper, cover = clique_cover_number(g, vertex_limit)
    exact, provenance, name = None, "bounds-only", ""
    if alphas[0] == upper:
        exact, provenance = Radical(Fraction(upper)), "perfect-match"
    else:
        reg = default_registry() if registry is None else registry
        hit = reg.lookup(g)
        if hit is not None:
            exact, name = hit
            provenance = "table"
    return CapacityBound(tuple(alphas), tuple(witnesses), upper, cover, exact, provenance, name)


def capacity_bounds(
    pattern: ZeroPattern,
    depth: int = 2,
    vertex_limit: int = DEFAULT_VERTEX_LIMIT,
    registry: CapacityRegistry | None = None,
) -> CapacityBound:
    return capacity_bounds_for_graph(confusability_graph(pattern), depth, vertex_limit, registry)


def capacity_table(alphabets: AlphabetPair, depth: int = 1, registry: CapacityRegistry | None = None) -> dict:
    """Ω -> exact 2**C0 for every pattern over the alphabets.

    Patterns whose value is unknown or irrational map to the Radical or to
    None; only rational entries can be hard-coded into a BSS program.
    """
    from .channel import all_patterns

    memo: dict = {}
    table: dict = {}
    for pattern in all_patterns(alphabets):
        g = confusability_graph(pattern)
        key = canonical_form(g) if len(g) <= CANONICAL_LIMIT else pattern.omega
        if key not in memo:
            memo[key] = capacity_bounds_for_graph(g, depth, registry=registry).exact
        table[pattern.omega] = memo[key]
    return table
