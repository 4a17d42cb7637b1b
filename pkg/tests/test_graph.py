
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alpharen import library
from alpharen.graph import (
    FeynmanDiagram,
    FeynmanGraph,
    GraphError,
    VertexOperator,
    divergence_degree,
    is_1pi,
    is_connected,
    loop_count,
)

from .conftest import make_diagram


# ---------------------------------------------------------------- structure


def test_single_vertex_self_loop_is_connected():
    g = FeynmanGraph(("v",), {"l": ("v", "v")})
    assert is_connected(g)


def test_two_vertices_without_internal_lines_are_disconnected():
    g = FeynmanGraph(("a", "b"), {}, {"e1": ("a", "in"), "e2": ("b", "out")})
    assert not is_connected(g)


def test_bubble_is_connected_and_1pi(std):
    assert is_connected(std["bubble"].graph)
    assert is_1pi(std["bubble"].graph)


def test_bubble_chain_is_not_1pi(std):
    assert is_connected(std["bubble_chain"].graph)
    assert not is_1pi(std["bubble_chain"].graph)


def test_bare_vertex_is_1pi(std):
    assert is_1pi(std["bare_vertex"].graph)


@pytest.mark.parametrize("name,L", [("tadpole", 1), ("bubble", 1), ("sunset", 2), ("nested_double_bubble", 2),
                                    ("tree_exchange", 0), ("bare_vertex", 0)])
def test_loop_count(std, name, L):
    assert loop_count(std[name].graph) == L


def test_loop_count_rejects_disconnected():
    g = FeynmanGraph(("a", "b"), {}, {"e1": ("a", "in"), "e2": ("b", "out")})
    with pytest.raises(GraphError):
        loop_count(g)


@pytest.mark.parametrize("name,omega", [("bubble", 0), ("tadpole", 2), ("sunset", 2), ("nested_double_bubble", 0),
                                        ("bubble_ring", -4)])
def test_divergence_degree(std, name, omega):
    assert divergence_degree(std[name]) == omega


def test_divergence_degree_regularised(std):
    d = std["sunset"]
    assert divergence_degree(d, 0.25) == pytest.approx(2 - 6 * 0.25)
    assert divergence_degree(d, 1e-300) == pytest.approx(divergence_degree(d))


def test_divergence_degree_counts_vertex_degree():
    d = make_diagram({"l1": ("a", "b"), "l2": ("a", "b")}, {"e1": ("a", "in"), "e2": ("b", "out")},
                     ops={"a": VertexOperator.dot("l1", "l1")})
    # 4L - 2n + deg: 4 - 4 + 2
    assert divergence_degree(d) == 2


def test_divergence_degree_rejects_non_1pi(std):
    with pytest.raises(GraphError):
        divergence_degree(std["bubble_chain"])


def test_graph_validation():
    with pytest.raises(GraphError, match="unknown vertex 'x'"):
        FeynmanGraph(("a",), {"l": ("a", "x")})
    with pytest.raises(GraphError, match="without lines"):
        FeynmanGraph(("a", "b"), {"l": ("a", "a")})
    with pytest.raises(GraphError, match="direction"):
        FeynmanGraph(("a",), {}, {"e": ("a", "sideways")})
    with pytest.raises(GraphError, match="twice"):
        FeynmanGraph(("a",), {"l": ("a", "a")}, {"l": ("a", "in")})


def test_diagram_needs_masses_and_incident_momenta():
    g = FeynmanGraph(("a",), {"l": ("a", "a")}, {"e": ("a", "in")})
    with pytest.raises(GraphError, match="no mass"):
        FeynmanDiagram(g, {}, {})
    with pytest.raises(GraphError, match="non-incident"):
        FeynmanDiagram(g, {"a": VertexOperator.dot("q", "q")}, {"l": 1.0})
    with pytest.raises(GraphError, match="negative mass"):
        FeynmanDiagram(g, {}, {"l": -1.0})


def test_arity_counts_line_ends(std):
    g = std["tadpole"].graph
    assert g.arity("v1") == 4
    assert std["bubble"].graph.arity("v1") == 4


# ------------------------------------------------------- random graph checks


@st.composite
def graphs(draw, max_lines=8):
    nv = draw(st.integers(1, 5))
    verts = [f"v{i}" for i in range(nv)]
    nl = draw(st.integers(0, max_lines))
    internal = {}
    for k in range(nl):
        a = draw(st.sampled_from(verts))
        b = draw(st.sampled_from(verts))
        internal[f"l{k}"] = (a, b)
    touched = {v for ab in internal.values() for v in ab}
    external = {f"e{v}": (v, "in") for v in verts if v not in touched}
    return FeynmanGraph(tuple(verts), internal, external)


def _connected_without(g, skip=None):
    seen = {g.vertices[0]}
    stack = [g.vertices[0]]
    while stack:
        v = stack.pop()
        for r, (a, b) in g.internal.items():
            if r == skip:
                continue
            for x, y in ((a, b), (b, a)):
                if x == v and y not in seen:
                    seen.add(y)
                    stack.append(y)
    return len(seen) == len(g.vertices)


@given(graphs())
def test_loop_count_equals_cycle_space_dimension(g):
    if not is_connected(g):
        return
    inc = np.zeros((len(g.vertices), len(g.internal)))
    idx = {v: i for i, v in enumerate(g.vertices)}
    for j, (a, b) in enumerate(g.internal.values()):
        inc[idx[a], j] -= 1
        inc[idx[b], j] += 1
    rank = np.linalg.matrix_rank(inc) if len(g.internal) else 0
    assert loop_count(g) == len(g.internal) - rank


@given(graphs())
def test_is_1pi_matches_brute_force(g):
    expected = _connected_without(g) and all(_connected_without(g, r) for r in g.internal)
    assert is_1pi(g) == expected


# ------------------------------------------------------------ vertex operators


def test_vertex_operator_algebra():
    a = VertexOperator.dot("x", "y") * 2 + VertexOperator.m2()
    assert a.degree == 2
    assert not a.is_constant
    assert (a - a) == VertexOperator(0)
    assert VertexOperator.dot("y", "x") == VertexOperator.dot("x", "y")
    assert VertexOperator(3).constant_value(mass_scale=2.0) == 3
    assert VertexOperator.m2(1).constant_value(mass_scale=2.0) == 4


def test_flip_negates_momentum():
    op = VertexOperator.dot("a", "b")
    assert op.flip("a") == VertexOperator.dot("a", "b", -1)
    assert op.flip("a").flip("a") == op


LINES = ["a", "b", "c"]


@st.composite
def operators(draw):
    terms = {}
    for _ in range(draw(st.integers(1, 4))):
        k = draw(st.integers(0, 2))
        pairs = tuple((draw(st.sampled_from(LINES)), draw(st.sampled_from(LINES))) for _ in range(k))
        m2 = draw(st.integers(0, 1))
        terms[(m2, pairs)] = draw(st.integers(-3, 3))
    return VertexOperator(terms)


REL = {"a": 1, "b": -1, "c": 1}


@given(operators())
def test_canonical_is_idempotent(op):
    c = op.canonical(REL)
    assert c.canonical(REL) == c
    assert "c" not in c.symbols  # the largest related id is eliminated


@given(operators(), st.sampled_from(LINES), st.integers(-3, 3))
def test_canonical_ignores_conservation_multiples(op, x, k):
    # adding k * (sum_r s_r p_r) . p_x vanishes on shell
    extra = sum((VertexOperator.dot(r, x, k * s) for r, s in REL.items()), VertexOperator(0))
    assert (op + extra).canonical(REL) == op.canonical(REL)


def test_diagram_canonicalises_vertex_operators():
    d = make_diagram({"l1": ("a", "b"), "l2": ("a", "b")}, {"e1": ("a", "in"), "e2": ("b", "out")},
                     ops={"a": VertexOperator.dot("l2", "l2")})
    # at a: -p_l1 - p_l2 + p_e1 = 0, so p_l2 = p_e1 - p_l1
    op = d.vertex_ops["a"]
    assert "l2" not in op.symbols
    assert op == (VertexOperator.dot("e1", "e1") - VertexOperator.dot("e1", "l1", 2) + VertexOperator.dot("l1", "l1"))


def test_flipped_diagram_keeps_its_operator_class():
    d = library.bubble()
    f = d.flipped("l1")
    assert f.graph.internal["l1"] == ("v2", "v1")
    assert f.constant_factor() == d.constant_factor()
