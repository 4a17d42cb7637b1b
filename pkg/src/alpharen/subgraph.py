"""1PI subdiagrams, disjoint families, quotient diagrams and painted components."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .graph import (
    FeynmanDiagram,
    FeynmanGraph,
    GraphError,
    VertexOperator,
    _components,
    is_1pi,
)

__all__ = [
    "MAX_INTERNAL_LINES",
    "Subdiagram",
    "enumerate_1pi_subdiagrams",
    "enumerate_disjoint_families",
    "quotient",
    "painted_components",
    "fresh_vertex_name",
]

MAX_INTERNAL_LINES = 12


@dataclass(frozen=True)
class Subdiagram:
    """Subdiagram ``(V', R')`` of a parent diagram.

    ``boundary`` lists the legs completing it: ``(leg_id, line, vertex, sign)``
    with ``sign = +1`` when ``line`` enters ``V'`` at ``vertex`` and ``-1``
    when it leaves.  A parent line with both ends in ``V'`` but not in ``R'``
    gives two legs, named ``line+`` and ``line-``.
    """

    parent: FeynmanDiagram
    vertices: frozenset[str]
    lines: frozenset[str]

    @property
    def key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return (tuple(sorted(self.vertices)), tuple(sorted(self.lines)))

    def __lt__(self, other):
        return self.key < other.key

    def __eq__(self, other):
        return isinstance(other, Subdiagram) and self.key == other.key and self.parent is other.parent

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        vs, ls = self.key
        return f"Subdiagram(V={list(vs)}, R={list(ls)})"

    @cached_property
    def boundary(self) -> tuple[tuple[str, str, str, int], ...]:
        g = self.parent.graph
        V = self.vertices
        legs = []
        for r, (a, b) in g.internal.items():
            if r in self.lines:
                continue
            ins, outs = b in V, a in V
            if ins and outs:
                legs.append((f"{r}+", r, b, +1))
                legs.append((f"{r}-", r, a, -1))
            elif ins:
                legs.append((r, r, b, +1))
            elif outs:
                legs.append((r, r, a, -1))
        for e, (v, _) in g.external.items():
            if v in V:
                legs.append((e, e, v, +1))
        return tuple(sorted(legs))

    @cached_property
    def diagram(self) -> FeynmanDiagram:
        """The subdiagram as a stand-alone diagram (legs become external lines)."""
        d = self.parent
        g = d.graph
        internal = {r: ab for r, ab in g.internal.items() if r in self.lines}
        external = {leg: (v, "in" if s > 0 else "out") for leg, _, v, s in self.boundary}
        ops = {}
        for v in self.vertices:
            op = d.vertex_ops[v]
            for leg, r, w, s in self.boundary:
                if w != v or r in g.external:
                    continue
                # parent momentum p_r expressed through the incoming leg momentum
                op = op.substitute(r, {leg: s})
            ops[v] = op
        masses = {r: d.masses[r] for r in internal}
        name = f"{d.name or 'diagram'}|{'+'.join(sorted(self.lines))}"
        return FeynmanDiagram(
            FeynmanGraph(tuple(v for v in g.vertices if v in self.vertices), internal, external),
            ops,
            masses,
            name=name,
            mass_scale=d.mass_scale,
        )

    @property
    def is_proper(self) -> bool:
        g = self.parent.graph
        return set(self.vertices) != set(g.vertices) or set(self.lines) != set(g.internal)


def _check_size(d: FeynmanDiagram, max_lines: int):
    if len(d.internal) > max_lines:
        raise GraphError(
            f"{len(d.internal)} internal lines exceeds the enumeration cap of {max_lines}"
        )


def _endpoints(g: FeynmanGraph, lines: Iterable[str]) -> frozenset[str]:
    return frozenset(v for r in lines for v in g.internal[r])


def _sub_is_1pi(g: FeynmanGraph, vertices, lines) -> bool:
    sub = FeynmanGraph(
        tuple(vertices), {r: g.internal[r] for r in lines}, {}
    )
    return is_1pi(sub)


def enumerate_1pi_subdiagrams(
    d: FeynmanDiagram, max_lines: int = MAX_INTERNAL_LINES
) -> list[Subdiagram]:
    """All proper 1PI subdiagrams with at least one internal line."""
    g = d.graph
    if not is_1pi(g):
        raise GraphError("subdiagram enumeration needs a 1PI diagram")
    _check_size(d, max_lines)
    lines = list(g.internal)
    out = []
    for k in range(1, len(lines) + 1):
        for subset in itertools.combinations(lines, k):
            V = _endpoints(g, subset)
            sub = Subdiagram(d, V, frozenset(subset))
            if not sub.is_proper:
                continue
            if _sub_is_1pi(g, V, subset):
                out.append(sub)
    return sorted(out)


def enumerate_disjoint_families(
    d: FeynmanDiagram,
    max_lines: int = MAX_INTERNAL_LINES,
    subdiagrams: Sequence[Subdiagram] | None = None,
) -> list[tuple[Subdiagram, ...]]:
    """Non-empty families of pairwise vertex-disjoint proper 1PI subdiagrams."""
    subs = enumerate_1pi_subdiagrams(d, max_lines) if subdiagrams is None else sorted(subdiagrams)
    families: list[tuple[Subdiagram, ...]] = []

    def extend(start: int, chosen: list[Subdiagram], used: frozenset[str]):
        for i in range(start, len(subs)):
            s = subs[i]
            if s.vertices & used:
                continue
            fam = chosen + [s]
            families.append(tuple(fam))
            extend(i + 1, fam, used | s.vertices)

    extend(0, [], frozenset())
    return sorted(families, key=lambda f: (len(f), [s.key for s in f]))


def fresh_vertex_name(d: FeynmanDiagram, sub: Subdiagram) -> str:
    base = "~" + "_".join(sorted(sub.vertices))
    name = base
    while name in d.vertices:
        name += "'"
    return name


def quotient(
    d: FeynmanDiagram,
    family: Sequence[Subdiagram],
    ops: Sequence[VertexOperator | complex | float] | None = None,
) -> FeynmanDiagram:
    """Collapse each family member to a fresh vertex carrying ``ops[i]``.

    ``ops[i]`` is a polynomial in the leg momenta of ``family[i]`` (leg ids as in
    :attr:`Subdiagram.boundary`); it is rewritten in terms of the quotient's
    line momenta.
    """
    family = list(family)
    if ops is None:
        ops = [VertexOperator.one()] * len(family)
    if len(ops) != len(family):
        raise GraphError("one vertex operator per family member is required")
    for a, b in itertools.combinations(family, 2):
        if a.vertices & b.vertices:
            raise GraphError("family members must not share vertices")
    for s in family:
        if not s.is_proper:
            raise GraphError("quotient needs proper subdiagrams (strict inclusion)")
    g = d.graph
    where: dict[str, str] = {}
    new_ops: dict[str, VertexOperator] = {}
    removed: set[str] = set()
    for s, op in zip(family, ops):
        nv = fresh_vertex_name(d, s)
        while nv in where.values():
            nv += "'"
        for v in s.vertices:
            where[v] = nv
        removed |= s.lines
        op = op if isinstance(op, VertexOperator) else VertexOperator(op)
        for leg, r, _, sign in s.boundary:
            if r in g.external:
                continue
            if leg.endswith(("+", "-")) and leg != r:
                op = op.substitute(leg, {r: 1 if leg.endswith("+") else -1})
            elif sign < 0:
                op = op.substitute(leg, {r: -1})
        new_ops[nv] = op
    vertices = sorted({where.get(v, v) for v in g.vertices})
    internal = {
        r: (where.get(a, a), where.get(b, b))
        for r, (a, b) in g.internal.items()
        if r not in removed
    }
    external = {e: (where.get(v, v), dr) for e, (v, dr) in g.external.items()}
    for v, op in d.vertex_ops.items():
        if v not in where:
            new_ops[v] = op
    masses = {r: d.masses[r] for r in internal}
    tag = ",".join("+".join(sorted(s.lines)) for s in family)
    return FeynmanDiagram(
        FeynmanGraph(tuple(vertices), internal, external),
        new_ops,
        masses,
        name=f"{d.name or 'diagram'}/{tag}",
        mass_scale=d.mass_scale,
    )


def _bridges(vertices, lines, g: FeynmanGraph) -> set[str]:
    out = set()
    for r in lines:
        rest = [s for s in lines if s != r]
        a, b = g.internal[r]
        if a == b:
            continue
        comps = _components(vertices, g.adjacency(rest) if rest else {v: set() for v in g.vertices})
        for c in comps:
            if a in c:
                if b not in c:
                    out.add(r)
                break
    return out


def painted_components(d: FeynmanDiagram, painted: Iterable[str]) -> list[Subdiagram]:
    """1PI components of the subgraph formed by the painted internal lines."""
    g = d.graph
    A = sorted(set(painted))
    unknown = set(A) - set(g.internal)
    if unknown:
        raise GraphError(f"painted lines are not internal lines: {sorted(unknown)}")
    if not A:
        return []
    V = sorted(_endpoints(g, A))
    keep = [r for r in A if r not in _bridges(V, A, g)]
    if not keep:
        return []
    adj = {v: set() for v in g.vertices}
    for r in keep:
        a, b = g.internal[r]
        adj[a].add(b)
        adj[b].add(a)
    out = []
    for comp in _components(sorted(_endpoints(g, keep)), adj):
        ls = frozenset(r for r in keep if g.internal[r][0] in comp)
        out.append(Subdiagram(d, frozenset(comp), ls))
    return sorted(out)
