import numpy as np
import pytest

from alpharen import library
from alpharen.graph import GraphError, VertexOperator, divergence_degree, is_1pi, loop_count
from alpharen.subgraph import (
    Subdiagram,
    enumerate_1pi_subdiagrams,
    enumerate_disjoint_families,
    painted_components,
    quotient,
)

ONE_PI = ["tadpole", "bubble", "sunset", "nested_double_bubble", "bubble_ring"]


def _random_1pi(n, seed=7):
    rng = np.random.default_rng(seed)
    return [library.random_1pi_diagram(rng) for _ in range(n)]


def test_bubble_has_no_proper_subdiagrams(std):
    assert enumerate_1pi_subdiagrams(std["bubble"]) == []
    assert enumerate_disjoint_families(std["bubble"]) == []


def test_sunset_subdiagrams_are_the_line_pairs(std):
    subs = enumerate_1pi_subdiagrams(std["sunset"])
    assert [s.key for s in subs] == [
        (("v1", "v2"), ("l1", "l2")),
        (("v1", "v2"), ("l1", "l3")),
        (("v1", "v2"), ("l2", "l3")),
    ]


def test_sunset_families_are_singletons(std):
    fams = enumerate_disjoint_families(std["sunset"])
    assert len(fams) == 3
    assert all(len(f) == 1 for f in fams)


def test_nested_bubble_contains_inner_bubble(std):
    keys = [s.key for s in enumerate_1pi_subdiagrams(std["nested_double_bubble"])]
    assert (("B", "C"), ("l3", "l4")) in keys


def test_bubble_ring_has_two_element_family(std):
    fams = enumerate_disjoint_families(std["bubble_ring"])
    sizes = [[s.key for s in f] for f in fams if len(f) == 2]
    assert sizes == [[(("v1", "v2"), ("l1", "l2")), (("v3", "v4"), ("l4", "l5"))]]


def test_enumeration_rejects_non_1pi(std):
    with pytest.raises(GraphError):
        enumerate_1pi_subdiagrams(std["bubble_chain"])
    with pytest.raises(GraphError):
        enumerate_disjoint_families(std["bubble_chain"])


def test_enumeration_is_sorted_duplicate_free_and_stable(std):
    for name in ONE_PI:
        a = [s.key for s in enumerate_1pi_subdiagrams(std[name])]
        b = [s.key for s in enumerate_1pi_subdiagrams(library.STANDARD[name]())]
        assert a == b == sorted(set(a))


def test_subdiagram_invariants(std):
    for d in [std[n] for n in ONE_PI] + _random_1pi(15):
        g = d.graph
        for s in enumerate_1pi_subdiagrams(d):
            assert s.lines
            assert all(set(g.internal[r]) <= s.vertices for r in s.lines)
            assert is_1pi(s.diagram.graph)
            assert s.is_proper
            legs = {leg for leg, *_ in s.boundary}
            expected = set()
            for r, (a, b) in g.internal.items():
                if r in s.lines:
                    continue
                if a in s.vertices and b in s.vertices:
                    expected |= {f"{r}+", f"{r}-"}
                elif a in s.vertices or b in s.vertices:
                    expected.add(r)
            expected |= {e for e, (v, _) in g.external.items() if v in s.vertices}
            assert legs == expected


def test_boundary_signs(std):
    s = Subdiagram(std["nested_double_bubble"], frozenset({"B", "C"}), frozenset({"l3", "l4"}))
    signs = {leg: sign for leg, _, _, sign in s.boundary if leg.startswith("l")}
    assert signs == {"l1": +1, "l2": -1}


def test_quotient_of_sunset_pair_is_tadpole(std):
    s = enumerate_1pi_subdiagrams(std["sunset"])[0]
    q = quotient(std["sunset"], [s])
    assert len(q.graph.vertices) == 1
    assert list(q.graph.internal) == ["l3"]
    a, b = q.graph.internal["l3"]
    assert a == b
    assert loop_count(q.graph) == 1


def test_quotient_of_nested_bubble_is_outer_bubble(std):
    d = std["nested_double_bubble"]
    inner = [s for s in enumerate_1pi_subdiagrams(d) if s.lines == {"l3", "l4"}]
    q = quotient(d, inner)
    assert len(q.graph.vertices) == 2
    assert sorted(q.graph.internal) == ["l1", "l2"]
    assert is_1pi(q.graph)
    assert divergence_degree(q) == 0


def test_quotient_rejects_improper_and_bad_arguments(std):
    d = std["bubble"]
    whole = Subdiagram(d, frozenset(d.graph.vertices), frozenset(d.graph.internal))
    with pytest.raises(GraphError, match="strict"):
        quotient(d, [whole])
    s = enumerate_1pi_subdiagrams(std["sunset"])
    with pytest.raises(GraphError, match="one vertex operator"):
        quotient(std["sunset"], s[:1], [])
    with pytest.raises(GraphError, match="share"):
        quotient(std["sunset"], s[:2])


def test_loop_number_additivity(std):
    for d in [std[n] for n in ONE_PI] + _random_1pi(15, seed=3):
        for fam in enumerate_disjoint_families(d):
            q = quotient(d, fam)
            assert loop_count(d.graph) == loop_count(q.graph) + sum(loop_count(s.diagram.graph) for s in fam)


def test_divergence_degree_additivity(std):
    for d in [std[n] for n in ONE_PI] + _random_1pi(15, seed=5):
        for fam in enumerate_disjoint_families(d):
            if len(fam) != 1:
                continue
            (s,) = fam
            leg = s.boundary[0][0]
            for op, delta in ((VertexOperator.one(), 0), (VertexOperator.dot(leg, leg), 2)):
                q = quotient(d, [s], [op])
                assert divergence_degree(q) == divergence_degree(d) - divergence_degree(s.diagram) + delta


def test_painted_components_examples(std):
    d = std["sunset"]
    (c,) = painted_components(d, {"l1", "l2"})
    assert c.key == (("v1", "v2"), ("l1", "l2"))
    assert painted_components(d, {"l1"}) == []
    assert painted_components(d, set()) == []
    with pytest.raises(GraphError):
        painted_components(d, {"nope"})


def test_painted_components_recover_subdiagram(std):
    for d in [std[n] for n in ONE_PI] + _random_1pi(15, seed=11):
        for s in enumerate_1pi_subdiagrams(d):
            assert painted_components(d, s.lines) == [s]


def test_painted_components_drop_bridges(std):
    d = std["bubble_ring"]
    comps = painted_components(d, {"l1", "l2", "l3", "l4", "l5"})
    assert [c.key for c in comps] == [(("v1", "v2"), ("l1", "l2")), (("v3", "v4"), ("l4", "l5"))]
