import json
from fractions import Fraction

import pytest

from alpharen import library
from alpharen.graph import VertexOperator
from alpharen.io import (
    DiagramFileError,
    diagram_to_dict,
    parse_diagram,
    parse_diagram_file,
    parse_expression,
    parse_point,
    serialize_diagram,
)


def test_parse_expression_forms():
    assert parse_expression("1") == VertexOperator.one()
    assert parse_expression("") == VertexOperator.one()
    assert parse_expression("m2") == VertexOperator.m2()
    assert parse_expression("p_a.p_b") == VertexOperator.dot("a", "b")
    assert parse_expression("2*p_a.p_b + m2") == VertexOperator.dot("a", "b", 2) + VertexOperator.m2()
    assert parse_expression("p_a*p_b") == VertexOperator.dot("a", "b")
    assert parse_expression("(p_a + p_b)*(p_a - p_b)") == VertexOperator.dot("a", "a") - VertexOperator.dot("b", "b")
    assert parse_expression("1/2*m2") == VertexOperator.m2(Fraction(1, 2))
    assert parse_expression("-p_x.p_x") == VertexOperator.dot("x", "x", -1)


@pytest.mark.parametrize("bad", ["p_a", "p_a +", "2 ** m2", "p_a.", "(m2", "m2 m2", "q"])
def test_parse_expression_errors(bad):
    with pytest.raises(DiagramFileError):
        parse_expression(bad)


def test_expression_round_trip():
    for s in ["1", "m2", "p_a.p_b", "2*p_a.p_b - 3*m2", "p_a.p_a*p_b.p_b + 1/3"]:
        op = parse_expression(s)
        assert parse_expression(op.to_expression()) == op


@pytest.mark.parametrize("name", sorted(library.STANDARD))
def test_round_trip_library(name):
    d = library.STANDARD[name]()
    text = serialize_diagram(d)
    back = parse_diagram(text)
    assert serialize_diagram(back) == text
    assert back.graph == d.graph and back.masses == d.masses and back.vertex_ops == d.vertex_ops


def test_packaged_bubble_file():
    from importlib.resources import files

    path = files("alpharen") / "data" / "bubble.json"
    d = parse_diagram_file(str(path))
    assert (len(d.vertices), len(d.internal), len(d.external)) == (2, 2, 4)
    assert path.read_text() == serialize_diagram(d)


def _doc(**over):
    doc = json.loads(serialize_diagram(library.bubble()))
    doc.update(over)
    return json.dumps(doc, indent=2)


def test_empty_vertex_op_defaults_to_one():
    d = parse_diagram(_doc(vertex_ops={"v1": "", "v2": "1"}))
    assert d.vertex_ops["v1"] == VertexOperator.one()
    d = parse_diagram(_doc(vertex_ops={}))
    assert all(op == VertexOperator.one() for op in d.vertex_ops.values())


def test_unknown_vertex_is_named_with_line():
    doc = json.loads(_doc())
    doc["internal_lines"][1]["to"] = "v9"
    text = json.dumps(doc, indent=2)
    with pytest.raises(DiagramFileError, match="v9") as exc:
        parse_diagram(text)
    assert exc.value.line == text.splitlines().index('      "to": "v9",') + 1
    assert str(exc.value).startswith(f"line {exc.value.line}:")


def test_duplicate_ids_reported_at_second_occurrence():
    doc = json.loads(_doc())
    doc["external_lines"][2]["id"] = "l1"
    text = json.dumps(doc, indent=2)
    with pytest.raises(DiagramFileError, match="l1") as exc:
        parse_diagram(text)
    lines = [i + 1 for i, s in enumerate(text.splitlines()) if '"l1"' in s]
    assert exc.value.line == lines[1]


def test_duplicate_json_keys_rejected():
    text = '{\n "vertices": ["a"],\n "vertices": ["b"],\n "internal_lines": [], "external_lines": []\n}'
    with pytest.raises(DiagramFileError, match="vertices") as exc:
        parse_diagram(text)
    assert exc.value.line is not None


def test_arity_mismatch():
    doc = json.loads(_doc())
    doc["vertices"] = [{"id": "v1", "arity": 3}, "v2"]
    with pytest.raises(DiagramFileError, match="arity"):
        parse_diagram(json.dumps(doc, indent=2))
    doc["vertices"] = [{"id": "v1", "arity": 4}, "v2"]
    assert parse_diagram(json.dumps(doc, indent=2)).graph.arity("v1") == 4


def test_syntax_and_schema_errors():
    with pytest.raises(DiagramFileError, match="syntax") as exc:
        parse_diagram('{\n  "vertices": [\n  "a",,\n]}')
    assert exc.value.line == 3
    with pytest.raises(DiagramFileError, match="unknown field"):
        parse_diagram(_doc(colour="red"))
    with pytest.raises(DiagramFileError, match="missing"):
        parse_diagram('{"vertices": []}')
    with pytest.raises(DiagramFileError, match="not contracted"):
        parse_diagram(_doc(vertex_ops={"v1": "p_e1"}))


def test_parse_allows_disconnected():
    text = json.dumps({
        "vertices": ["a", "b"],
        "internal_lines": [{"id": "l1", "from": "a", "to": "a"}, {"id": "l2", "from": "b", "to": "b"}],
        "external_lines": [],
    })
    d = parse_diagram(text)
    assert d.masses == {"l1": 1.0, "l2": 1.0}


def test_parse_diagram_file_prefixes_name(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{")
    with pytest.raises(DiagramFileError, match="broken.json"):
        parse_diagram_file(p)


def test_diagram_to_dict_keeps_order():
    doc = diagram_to_dict(library.sunset())
    assert list(doc) == ["name", "vertices", "internal_lines", "external_lines", "vertex_ops"]


def test_parse_point():
    d = library.sunset()
    assert parse_point("e1=0.5", d) == {"e1": [0.5, 0, 0, 0], "e2": [-0.5, 0, 0, 0]}
    assert parse_point("e1=1,2,0,0;e2=-1,-2,0,0", d)["e2"] == [-1, -2, 0, 0]
    assert parse_point({"e1": 0.25}, d)["e2"] == [-0.25, 0, 0, 0]
    b = library.bubble()
    assert parse_point("e1=0.5", b) == {"e1": [0.5, 0, 0, 0]}
    for bad in ("e9=1", "e1", "e1=x", "e1=1,2"):
        with pytest.raises(ValueError):
            parse_point(bad, d)
