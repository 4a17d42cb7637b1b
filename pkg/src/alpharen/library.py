"""Standard scalar diagrams with constant (phi^4-type) vertices."""

from __future__ import annotations

import numpy as np

from .graph import FeynmanDiagram, FeynmanGraph, is_1pi

__all__ = [
    "tadpole",
    "bubble",
    "sunset",
    "nested_double_bubble",
    "bubble_chain",
    "bubble_ring",
    "bare_vertex",
    "tree_exchange",
    "STANDARD",
    "random_1pi_diagram",
    "random_momenta",
]


def _diagram(name, vertices, internal, external, mass, mass_scale=1.0):
    g = FeynmanGraph(tuple(vertices), internal, external)
    return FeynmanDiagram(g, {}, {r: mass for r in internal}, name=name, mass_scale=mass_scale)


def tadpole(mass: float = 1.0) -> FeynmanDiagram:
    """One vertex with a self-loop and two external legs."""
    return _diagram("tadpole", ["v1"], {"l1": ("v1", "v1")}, {"e1": ("v1", "in"), "e2": ("v1", "out")}, mass)


def bubble(mass: float = 1.0) -> FeynmanDiagram:
    """Two vertices joined by two lines; two legs at each vertex."""
    return _diagram(
        "bubble",
        ["v1", "v2"],
        {"l1": ("v1", "v2"), "l2": ("v1", "v2")},
        {"e1": ("v1", "in"), "e2": ("v1", "in"), "e3": ("v2", "out"), "e4": ("v2", "out")},
        mass,
    )


def sunset(mass: float = 1.0) -> FeynmanDiagram:
    """Two vertices joined by three lines; one leg at each vertex."""
    return _diagram(
        "sunset",
        ["v1", "v2"],
        {"l1": ("v1", "v2"), "l2": ("v1", "v2"), "l3": ("v1", "v2")},
        {"e1": ("v1", "in"), "e2": ("v2", "out")},
        mass,
    )


def nested_double_bubble(mass: float = 1.0) -> FeynmanDiagram:
    """A bubble (lines l3, l4 between B and C) inserted into one side of an outer bubble.

    Collapsing the inner bubble leaves the outer bubble on vertices A and ~B_C.
    """
    return _diagram(
        "nested_double_bubble",
        ["A", "B", "C"],
        {"l1": ("A", "B"), "l2": ("C", "A"), "l3": ("B", "C"), "l4": ("B", "C")},
        {"e1": ("A", "in"), "e2": ("A", "in"), "e3": ("B", "out"), "e4": ("C", "out")},
        mass,
    )


def bubble_chain(mass: float = 1.0) -> FeynmanDiagram:
    """Two bubbles in series joined by a single line (not 1PI)."""
    return _diagram(
        "bubble_chain",
        ["v1", "v2", "v3", "v4"],
        {
            "l1": ("v1", "v2"),
            "l2": ("v1", "v2"),
            "l3": ("v2", "v3"),
            "l4": ("v3", "v4"),
            "l5": ("v3", "v4"),
        },
        {"e1": ("v1", "in"), "e2": ("v1", "in"), "e3": ("v2", "out"), "e4": ("v3", "in"), "e5": ("v4", "out"), "e6": ("v4", "out")},
        mass,
    )


def bubble_ring(mass: float = 1.0) -> FeynmanDiagram:
    """Six vertices on a ring; the segments v1-v2 and v3-v4 are doubled into bubbles."""
    internal = {
        "l1": ("v1", "v2"),
        "l2": ("v1", "v2"),
        "l3": ("v2", "v3"),
        "l4": ("v3", "v4"),
        "l5": ("v3", "v4"),
        "l6": ("v4", "v5"),
        "l7": ("v5", "v6"),
        "l8": ("v6", "v1"),
    }
    external = {
        "e1": ("v1", "in"),
        "e2": ("v2", "out"),
        "e3": ("v3", "in"),
        "e4": ("v4", "out"),
        "e5": ("v5", "in"),
        "e6": ("v5", "out"),
        "e7": ("v6", "in"),
        "e8": ("v6", "out"),
    }
    return _diagram("bubble_ring", [f"v{i}" for i in range(1, 7)], internal, external, mass)


def bare_vertex() -> FeynmanDiagram:
    """A single vertex with four legs and no internal lines."""
    g = FeynmanGraph(("v1",), {}, {f"e{i}": ("v1", "in" if i < 3 else "out") for i in range(1, 5)})
    return FeynmanDiagram(g, {}, {}, name="bare_vertex")


def tree_exchange(mass: float = 1.0) -> FeynmanDiagram:
    """Two vertices joined by one line (a tree, L = 0)."""
    return _diagram(
        "tree_exchange",
        ["v1", "v2"],
        {"l1": ("v1", "v2")},
        {"e1": ("v1", "in"), "e2": ("v1", "in"), "e3": ("v2", "out"), "e4": ("v2", "out")},
        mass,
    )


STANDARD = {
    "tadpole": tadpole,
    "bubble": bubble,
    "sunset": sunset,
    "nested_double_bubble": nested_double_bubble,
    "bubble_chain": bubble_chain,
    "bubble_ring": bubble_ring,
    "bare_vertex": bare_vertex,
    "tree_exchange": tree_exchange,
}


def random_1pi_diagram(rng: np.random.Generator, max_lines: int = 6, max_vertices: int = 4) -> FeynmanDiagram:
    """A random connected 1PI diagram with at most ``max_lines`` internal lines.

    Multi-edges are allowed and self-loops are not.  Two to four external legs
    are attached at random vertices.  Drawn by rejection, so the result depends
    only on the generator state.
    """
    while True:
        nv = int(rng.integers(2, max_vertices + 1))
        nl = int(rng.integers(nv, max_lines + 1))
        verts = [f"v{i}" for i in range(1, nv + 1)]
        internal = {}
        for k in range(1, nl + 1):
            a, b = rng.choice(nv, size=2, replace=False)
            internal[f"l{k}"] = (verts[a], verts[b])
        ne = int(rng.integers(2, 5))
        external = {f"e{k}": (verts[int(rng.integers(nv))], "in") for k in range(1, ne + 1)}
        used = {v for ends in internal.values() for v in ends}
        if len(used) < nv:
            continue
        g = FeynmanGraph(tuple(verts), internal, external)
        if is_1pi(g):
            return FeynmanDiagram(g, {}, {r: 1.0 for r in internal}, name=f"random_{nv}v_{nl}l")


def random_momenta(rng: np.random.Generator, d: FeynmanDiagram, scale: float = 1.0) -> dict[str, np.ndarray]:
    """Gaussian incoming momenta with total sum zero."""
    exts = list(d.external)
    p = {e: scale * rng.normal(size=4) for e in exts[:-1]}
    if exts:
        p[exts[-1]] = -sum(p.values(), np.zeros(4))
    return p
