"""Feynman graphs and diagrams: structure, vertex operators, power counting.

Conventions
-----------
Internal lines are stored as ``line -> (source, target)``; the line momentum
flows from ``source`` into ``target``.  External lines are stored as
``line -> (vertex, direction)`` with ``direction`` in ``{"in", "out"}``.  As in
the overall ``delta(p_1 + ... + p_n)`` of the amplitude, every external
momentum is counted as *incoming* at its vertex, whatever its direction tag.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Number
from typing import Iterable, Mapping

__all__ = [
    "GraphError",
    "FeynmanGraph",
    "VertexOperator",
    "FeynmanDiagram",
    "is_connected",
    "is_1pi",
    "loop_count",
    "divergence_degree",
]

SPACETIME_DIM = 4


class GraphError(ValueError):
    """Malformed graph or a structural precondition that does not hold."""


def _simplify(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


@dataclass(frozen=True)
class FeynmanGraph:
    vertices: tuple[str, ...]
    internal: Mapping[str, tuple[str, str]]
    external: Mapping[str, tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))
        object.__setattr__(self, "internal", dict(sorted(self.internal.items())))
        object.__setattr__(self, "external", dict(sorted(self.external.items())))
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex identifiers")
        dup = set(self.internal) & set(self.external)
        if dup:
            raise GraphError(f"line ids used twice: {sorted(dup)}")
        touched = set()
        for r, (a, b) in self.internal.items():
            for v in (a, b):
                if v not in vs:
                    raise GraphError(f"line {r!r} references unknown vertex {v!r}")
            touched.update((a, b))
        for r, (v, d) in self.external.items():
            if v not in vs:
                raise GraphError(f"line {r!r} references unknown vertex {v!r}")
            if d not in ("in", "out"):
                raise GraphError(f"external line {r!r}: direction must be 'in' or 'out'")
            touched.add(v)
        lonely = vs - touched
        if lonely:
            raise GraphError(f"vertices without lines: {sorted(lonely)}")

    def __hash__(self):
        return hash((self.vertices, tuple(self.internal.items()), tuple(self.external.items())))

    @property
    def lines(self) -> tuple[str, ...]:
        return tuple(sorted([*self.internal, *self.external]))

    @property
    def incoming(self) -> tuple[str, ...]:
        return tuple(r for r, (_, d) in self.external.items() if d == "in")

    @property
    def outgoing(self) -> tuple[str, ...]:
        return tuple(r for r, (_, d) in self.external.items() if d == "out")

    @cached_property
    def incidence(self) -> dict[str, dict[str, int]]:
        """vertex -> {line: sign} entering the momentum-conservation law.

        Internal lines count +1 at their target and -1 at their source (a
        self-loop cancels), external lines +1.
        """
        inc: dict[str, dict[str, int]] = {v: {} for v in self.vertices}
        for r, (a, b) in self.internal.items():
            inc[b][r] = inc[b].get(r, 0) + 1
            inc[a][r] = inc[a].get(r, 0) - 1
        for r, (v, _) in self.external.items():
            inc[v][r] = inc[v].get(r, 0) + 1
        return {v: {r: s for r, s in d.items() if s} for v, d in inc.items()}

    def arity(self, v: str) -> int:
        """Number of line ends at ``v`` (self-loops count twice)."""
        n = sum((a == v) + (b == v) for a, b in self.internal.values())
        return n + sum(w == v for w, _ in self.external.values())

    def lines_at(self, v: str) -> tuple[str, ...]:
        out = [r for r, (a, b) in self.internal.items() if v in (a, b)]
        out += [r for r, (w, _) in self.external.items() if w == v]
        return tuple(sorted(out))

    def adjacency(self, lines: Iterable[str] | None = None) -> dict[str, set[str]]:
        lines = self.internal if lines is None else lines
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for r in lines:
            a, b = self.internal[r]
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def flipped(self, line: str) -> "FeynmanGraph":
        a, b = self.internal[line]
        internal = dict(self.internal)
        internal[line] = (b, a)
        return FeynmanGraph(self.vertices, internal, self.external)


def _components(vertices: Iterable[str], adj: Mapping[str, set[str]]) -> list[set[str]]:
    seen: set[str] = set()
    comps = []
    for v in vertices:
        if v in seen:
            continue
        comp = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        comps.append(comp)
    return comps


def is_connected(g: FeynmanGraph) -> bool:
    return len(_components(g.vertices, g.adjacency())) <= 1


def is_1pi(g: FeynmanGraph) -> bool:
    if not is_connected(g):
        return False
    lines = list(g.internal)
    for r in lines:
        rest = [s for s in lines if s != r]
        if len(_components(g.vertices, g.adjacency(rest))) > 1:
            return False
    return True


def loop_count(g: FeynmanGraph) -> int:
    if not is_connected(g):
        raise GraphError("loop_count needs a connected graph")
    return len(g.internal) - len(g.vertices) + 1


# --------------------------------------------------------------------------
# vertex operators
# --------------------------------------------------------------------------

Monomial = tuple[int, tuple[tuple[str, str], ...]]


def _mono(m2: int, pairs: Iterable[tuple[str, str]]) -> Monomial:
    return (m2, tuple(sorted(tuple(sorted(p)) for p in pairs)))


class VertexOperator:
    """Scalar polynomial in the momenta of the lines meeting at a vertex.

    Terms are stored as ``{(m2_power, ((a, b), ...)): coefficient}`` where each
    pair ``(a, b)`` stands for the dot product ``p_a . p_b`` of line momenta
    (line orientation) and ``m2`` is the squared mass-scale token.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | Number | None = None):
        if terms is None:
            terms = {}
        elif isinstance(terms, Number):
            terms = {_mono(0, ()): terms}
        clean: dict[Monomial, Number] = {}
        for (m2, pairs), c in terms.items():
            key = _mono(m2, pairs)
            clean[key] = clean.get(key, 0) + c
        self.terms = {k: _simplify(v) for k, v in sorted(clean.items()) if v != 0}

    @classmethod
    def one(cls) -> "VertexOperator":
        return cls(1)

    @classmethod
    def dot(cls, a: str, b: str, coeff: Number = 1) -> "VertexOperator":
        return cls({_mono(0, [(a, b)]): coeff})

    @classmethod
    def m2(cls, coeff: Number = 1) -> "VertexOperator":
        return cls({_mono(1, ()): coeff})

    @property
    def degree(self) -> int:
        """Momentum degree (0 for the zero polynomial)."""
        return max((2 * len(p) for _, p in self.terms), default=0)

    @property
    def is_constant(self) -> bool:
        return all(not p for _, p in self.terms)

    @property
    def symbols(self) -> set[str]:
        return {x for _, pairs in self.terms for pr in pairs for x in pr}

    def is_homogeneous(self) -> bool:
        return len({2 * len(p) for _, p in self.terms}) <= 1

    def constant_value(self, mass_scale: float = 1.0) -> Number:
        if not self.is_constant:
            raise GraphError("vertex operator depends on momenta")
        return sum(c * mass_scale ** (2 * m2) for (m2, _), c in self.terms.items())

    def __add__(self, other):
        other = other if isinstance(other, VertexOperator) else VertexOperator(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return VertexOperator(t)

    __radd__ = __add__

    def __neg__(self):
        return VertexOperator({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, VertexOperator) else -other)

    def __mul__(self, other):
        if not isinstance(other, VertexOperator):
            return VertexOperator({k: c * other for k, c in self.terms.items()})
        t: dict[Monomial, Number] = {}
        for (ma, pa), ca in self.terms.items():
            for (mb, pb), cb in other.terms.items():
                key = _mono(ma + mb, pa + pb)
                t[key] = t.get(key, 0) + ca * cb
        return VertexOperator(t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Number):
            other = VertexOperator(other)
        return isinstance(other, VertexOperator) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def substitute(self, line: str, combo: Mapping[str, Number]) -> "VertexOperator":
        """Replace ``p_line`` by the linear combination ``sum c_k p_k``."""
        out: dict[Monomial, Number] = {}
        for (m2, pairs), c in self.terms.items():
            expanded = [([], c)]
            for a, b in pairs:
                la = combo.items() if a == line else [(a, 1)]
                lb = combo.items() if b == line else [(b, 1)]
                nxt = []
                for plist, cc in expanded:
                    for (x, cx), (y, cy) in itertools.product(la, lb):
                        nxt.append((plist + [(x, y)], cc * cx * cy))
                expanded = nxt
            for plist, cc in expanded:
                key = _mono(m2, plist)
                out[key] = out.get(key, 0) + cc
        return VertexOperator(out)

    def canonical(self, relation: Mapping[str, int]) -> "VertexOperator":
        """Representative modulo ``sum_r relation[r] p_r = 0``.

        The momentum of the related line with the largest identifier is
        eliminated; lines with zero weight (self-loops) are untouched.
        """
        live = {r: s for r, s in relation.items() if s}
        if not live:
            return VertexOperator(self.terms)
        e = max(live)
        se = live[e]
        combo = {r: Fraction(-s, se) for r, s in live.items() if r != e}
        return self.substitute(e, combo)

    def flip(self, line: str) -> "VertexOperator":
        return self.substitute(line, {line: -1})

    def rename(self, mapping: Mapping[str, str]) -> "VertexOperator":
        out = {}
        for (m2, pairs), c in self.terms.items():
            key = _mono(m2, [(mapping.get(a, a), mapping.get(b, b)) for a, b in pairs])
            out[key] = out.get(key, 0) + c
        return VertexOperator(out)

    def to_expression(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (m2, pairs), c in self.terms.items():
            factors = ["m2"] * m2 + [f"p_{a}.p_{b}" for a, b in pairs]
            if isinstance(c, Fraction):
                cs = f"{c.numerator}/{c.denominator}"
            else:
                cs = repr(c)
            if not factors:
                parts.append(cs)
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([cs, *factors]))
        return " + ".join(parts)

    def __repr__(self):
        return f"VertexOperator({self.to_expression()!r})"


@dataclass(frozen=True, eq=False)
class FeynmanDiagram:
    graph: FeynmanGraph
    vertex_ops: Mapping[str, VertexOperator] = field(default_factory=dict)
    masses: Mapping[str, float] = field(default_factory=dict)
    name: str = ""
    mass_scale: float = 1.0

    def __post_init__(self):
        g = self.graph
        ops = {}
        for v in g.vertices:
            op = self.vertex_ops.get(v, VertexOperator.one())
            if not isinstance(op, VertexOperator):
                op = VertexOperator(op)
            unknown = op.symbols - set(g.lines_at(v))
            if unknown:
                raise GraphError(
                    f"vertex {v!r}: operator uses momenta of non-incident lines {sorted(unknown)}"
                )
            ops[v] = op.canonical(g.incidence[v])
        extra = set(self.vertex_ops) - set(g.vertices)
        if extra:
            raise GraphError(f"vertex operators for unknown vertices {sorted(extra)}")
        masses = {}
        for r in g.internal:
            if r not in self.masses:
                raise GraphError(f"no mass given for internal line {r!r}")
            m = float(self.masses[r])
            if m < 0:
                raise GraphError(f"negative mass on line {r!r}")
            masses[r] = m
        object.__setattr__(self, "vertex_ops", ops)
        object.__setattr__(self, "masses", masses)

    def _key(self):
        return (
            self.graph,
            tuple(self.vertex_ops.items()),
            tuple(self.masses.items()),
            self.mass_scale,
        )

    def __eq__(self, other):
        return isinstance(other, FeynmanDiagram) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def internal(self):
        return self.graph.internal

    @property
    def external(self):
        return self.graph.external

    @property
    def has_constant_vertices(self) -> bool:
        return all(op.is_constant for op in self.vertex_ops.values())

    def constant_factor(self) -> float:
        """Product of constant vertex operators (mass-scale tokens resolved)."""
        out = 1.0
        for op in self.vertex_ops.values():
            out *= float(op.constant_value(self.mass_scale))
        return out

    def with_masses(self, masses: Mapping[str, float] | float) -> "FeynmanDiagram":
        if isinstance(masses, Number):
            masses = {r: float(masses) for r in self.internal}
        return FeynmanDiagram(self.graph, self.vertex_ops, masses, self.name, self.mass_scale)

    def flipped(self, line: str) -> "FeynmanDiagram":
        """Same diagram with one internal line reversed (operators follow)."""
        ops = {v: op.flip(line) for v, op in self.vertex_ops.items()}
        return FeynmanDiagram(self.graph.flipped(line), ops, self.masses, self.name, self.mass_scale)

    def __repr__(self):
        nm = self.name or "diagram"
        return (
            f"<FeynmanDiagram {nm}: {len(self.vertices)} vertices, "
            f"{len(self.internal)} internal, {len(self.external)} external>"
        )


def divergence_degree(d: FeynmanDiagram, z: complex = 0):
    """Superficial degree of divergence, regularized when ``z != 0``.

    Each internal line contributes ``4 - 2(1 + z)``; at ``z = 0`` the result is
    the integer power-counting index.
    """
    if not is_1pi(d.graph):
        raise GraphError("divergence degree is defined for 1PI diagrams")
    vert = sum(op.degree - SPACETIME_DIM for op in d.vertex_ops.values())
    n = len(d.internal)
    if z == 0:
        return vert + 2 * n + SPACETIME_DIM
    return vert + n * (SPACETIME_DIM - 2 * (1 + z)) + SPACETIME_DIM
