"""Diagram files: a strict JSON document plus a small vertex-expression grammar.

File layout::

    {
      "name": "bubble",
      "mass_scale": 1.0,
      "vertices": ["v1", "v2"],
      "internal_lines": [{"id": "l1", "from": "v1", "to": "v2", "mass": 1.0}],
      "external_lines": [{"id": "e1", "vertex": "v1", "direction": "in"}],
      "vertex_ops": {"v1": "1", "v2": "1"}
    }

``mass_scale`` and ``vertex_ops`` are optional; a missing or empty vertex
operator means ``1``.  A vertex may also be written ``{"id": "v1", "arity": 4}``
to have its number of line ends checked.

Expression grammar (whitespace ignored)::

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := "-" factor | number | "m2" | mom ("." mom)? | "(" expr ")"
    mom    := "p_" identifier
    number := decimal literal | integer "/" integer

A product of two bare momenta ``p_a*p_b`` is read as the dot product.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .graph import FeynmanDiagram, FeynmanGraph, GraphError, VertexOperator

__all__ = [
    "DiagramFileError",
    "parse_expression",
    "parse_diagram",
    "parse_diagram_file",
    "diagram_to_dict",
    "serialize_diagram",
    "parse_point",
]


class DiagramFileError(GraphError):
    """Malformed diagram file; the message names the offending line."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


# --------------------------------------------------------------------------
# expressions
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<mom>p_[A-Za-z0-9_~]+)|(?P<m2>m2)|(?P<op>[-+*.()]))"
)


class _ExprError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(msg)
        self.pos = pos


def _tokenize(s: str):
    out, pos = [], 0
    while pos < len(s):
        if s[pos:].strip() == "":
            break
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise _ExprError(f"unexpected character {s[pos:].lstrip()[:1]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(s)))
    return out


class _Poly:
    """Polynomial with at most one unpaired momentum per monomial (pending a dot)."""

    def __init__(self, terms):
        self.terms = {k: v for k, v in terms.items() if v != 0}

    @classmethod
    def const(cls, c):
        return cls({(0, (), None): c})

    def __add__(self, o):
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, 0) + v
        return _Poly(t)

    def scale(self, c):
        return _Poly({k: v * c for k, v in self.terms.items()})

    def __mul__(self, o):
        t = {}
        for (ma, pa, va), ca in self.terms.items():
            for (mb, pb, vb), cb in o.terms.items():
                pairs, open_ = pa + pb, None
                if va and vb:
                    pairs = pairs + ((va, vb),)
                else:
                    open_ = va or vb
                k = (ma + mb, tuple(sorted(tuple(sorted(p)) for p in pairs)), open_)
                t[k] = t.get(k, 0) + ca * cb
        return _Poly(t)


def parse_expression(s: str) -> VertexOperator:
    """Parse a vertex-operator expression such as ``"2*p_l1.p_l2 + m2"``."""
    if s is None or str(s).strip() == "":
        return VertexOperator.one()
    s = str(s)
    try:
        toks = _tokenize(s)
    except _ExprError as exc:
        raise DiagramFileError(f"{exc} at column {exc.pos + 1} of {s!r}") from None
    i = 0

    def peek():
        return toks[i]

    def take(expected=None):
        nonlocal i
        tok = toks[i]
        if expected is not None and tok[1] != expected:
            raise _ExprError(f"expected {expected!r}", tok[2])
        i += 1
        return tok

    def expr():
        v = term()
        while peek()[1] in "+-" and peek()[0] == "op":
            sign = take()[1]
            t = term()
            v = v + (t if sign == "+" else t.scale(-1))
        return v

    def term():
        v = factor()
        while peek()[0] == "op" and peek()[1] == "*":
            take()
            v = v * factor()
        return v

    def momentum_name(tok):
        return tok[1][2:]

    def factor():
        kind, val, pos = peek()
        if kind == "op" and val == "-":
            take()
            return factor().scale(-1)
        if kind == "num":
            take()
            c = Fraction(val) if "/" in val else (int(val) if re.fullmatch(r"\d+", val) else float(val))
            return _Poly.const(c)
        if kind == "m2":
            take()
            return _Poly({(1, (), None): 1})
        if kind == "mom":
            take()
            a = momentum_name((kind, val, pos))
            if peek()[0] == "op" and peek()[1] == ".":
                take()
                kb, vb, pb = peek()
                if kb != "mom":
                    raise _ExprError("expected a momentum after '.'", pb)
                take()
                return _Poly({(0, (tuple(sorted((a, vb[2:]))),), None): 1})
            return _Poly({(0, (), a): 1})
        if kind == "op" and val == "(":
            take()
            v = expr()
            take(")")
            return v
        if kind == "end":
            raise _ExprError("unexpected end of expression", pos)
        raise _ExprError(f"unexpected token {val!r}", pos)

    try:
        v = expr()
        if peek()[0] != "end":
            raise _ExprError(f"unexpected token {peek()[1]!r}", peek()[2])
    except _ExprError as exc:
        raise DiagramFileError(f"{exc} at column {exc.pos + 1} of {s!r}") from None
    terms = {}
    for (m2, pairs, open_), c in v.terms.items():
        if open_ is not None:
            raise DiagramFileError(f"momentum p_{open_} is not contracted in {s!r} (odd momentum degree)")
        terms[(m2, pairs)] = terms.get((m2, pairs), 0) + c
    return VertexOperator(terms)


# --------------------------------------------------------------------------
# diagram files
# --------------------------------------------------------------------------


def _line_of(text: str, *needles: str, start: int = 0) -> int | None:
    """1-based line of the first occurrence of ``needles`` in order, or ``None``."""
    pos = start
    for n in needles:
        k = text.find(n, pos)
        if k < 0:
            return None
        pos = k
    return text.count("\n", 0, pos) + 1


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise DiagramFileError(f"duplicate key {k!r}")
        out[k] = v
    return out


_TOP = ("name", "mass_scale", "vertices", "internal_lines", "external_lines", "vertex_ops")


def parse_diagram(text: str) -> FeynmanDiagram:
    """Parse the JSON diagram format (see the module docstring)."""
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise DiagramFileError(f"syntax error: {exc.msg} (column {exc.colno})", exc.lineno) from None
    except DiagramFileError as exc:
        key = str(exc).split("'")[1] if "'" in str(exc) else ""
        raise DiagramFileError(str(exc), _line_of(text, f'"{key}"')) from None
    if not isinstance(doc, dict):
        raise DiagramFileError("top level must be an object", 1)
    unknown = set(doc) - set(_TOP)
    if unknown:
        k = sorted(unknown)[0]
        raise DiagramFileError(f"unknown field {k!r}", _line_of(text, f'"{k}"'))
    for k in ("vertices", "internal_lines", "external_lines"):
        if k not in doc:
            raise DiagramFileError(f"missing field {k!r}")
        if not isinstance(doc[k], list):
            raise DiagramFileError(f"{k!r} must be a list", _line_of(text, f'"{k}"'))

    seen: dict[str, str] = {}

    def claim(ident, what, where):
        if not isinstance(ident, str) or not ident:
            raise DiagramFileError(f"{what} identifiers must be non-empty strings", where)
        if ident in seen:
            first = text.find(f'"{ident}"')
            again = _line_of(text, f'"{ident}"', start=first + 1) if first >= 0 else where
            kind = what if seen[ident] == what else f"{seen[ident]} and {what}"
            raise DiagramFileError(f"duplicate identifier {ident!r} ({kind})", again)
        seen[ident] = what

    vertices, arities = [], {}
    vpos = text.find('"vertices"')
    for v in doc["vertices"]:
        if isinstance(v, dict):
            vid = v.get("id")
            where = _line_of(text, f'"{vid}"', start=vpos)
            if set(v) - {"id", "arity"}:
                raise DiagramFileError(f"vertex {vid!r}: unknown keys {sorted(set(v) - {'id', 'arity'})}", where)
            if "arity" in v:
                arities[vid] = v["arity"]
        else:
            vid = v
            where = _line_of(text, f'"{vid}"', start=vpos)
        claim(vid, "vertex", where)
        vertices.append(vid)
    vset = set(vertices)

    def vertex_ref(vid, owner, where, start):
        if vid not in vset:
            exact = _line_of(text, f'"{owner}"', f'"{vid}"', start=start) if isinstance(vid, str) else None
            raise DiagramFileError(f"line {owner!r} references unknown vertex {vid!r}", exact or where)

    internal, masses = {}, {}
    ipos = text.find('"internal_lines"')
    for item in doc["internal_lines"]:
        if not isinstance(item, dict):
            raise DiagramFileError("internal lines must be objects", _line_of(text, "{", start=ipos))
        rid = item.get("id")
        where = _line_of(text, f'"{rid}"', start=ipos)
        extra = set(item) - {"id", "from", "to", "mass"}
        if extra:
            raise DiagramFileError(f"internal line {rid!r}: unknown keys {sorted(extra)}", where)
        for k in ("from", "to"):
            if k not in item:
                raise DiagramFileError(f"internal line {rid!r}: missing {k!r}", where)
        claim(rid, "internal line", where)
        vertex_ref(item["from"], rid, where, ipos)
        vertex_ref(item["to"], rid, where, ipos)
        mass = item.get("mass", 1.0)
        if not isinstance(mass, (int, float)) or isinstance(mass, bool) or mass < 0:
            raise DiagramFileError(f"internal line {rid!r}: mass must be a non-negative number", where)
        internal[rid] = (item["from"], item["to"])
        masses[rid] = float(mass)

    external = {}
    epos = text.find('"external_lines"')
    for item in doc["external_lines"]:
        if not isinstance(item, dict):
            raise DiagramFileError("external lines must be objects", _line_of(text, "{", start=epos))
        rid = item.get("id")
        where = _line_of(text, f'"{rid}"', start=epos)
        extra = set(item) - {"id", "vertex", "direction"}
        if extra:
            raise DiagramFileError(f"external line {rid!r}: unknown keys {sorted(extra)}", where)
        if "vertex" not in item:
            raise DiagramFileError(f"external line {rid!r}: missing 'vertex'", where)
        claim(rid, "external line", where)
        vertex_ref(item["vertex"], rid, where, epos)
        direction = item.get("direction", "in")
        if direction not in ("in", "out"):
            raise DiagramFileError(f"external line {rid!r}: direction must be 'in' or 'out'", where)
        external[rid] = (item["vertex"], direction)

    opos = text.find('"vertex_ops"')
    raw_ops = doc.get("vertex_ops", {}) or {}
    if not isinstance(raw_ops, dict):
        raise DiagramFileError("'vertex_ops' must be an object", _line_of(text, '"vertex_ops"'))
    ops = {}
    for vid, expr in raw_ops.items():
        where = _line_of(text, f'"{vid}"', start=opos)
        if vid not in vset:
            raise DiagramFileError(f"vertex_ops references unknown vertex {vid!r}", where)
        if not isinstance(expr, (str, int, float)) or isinstance(expr, bool):
            raise DiagramFileError(f"vertex {vid!r}: operator must be an expression string", where)
        try:
            ops[vid] = parse_expression(str(expr))
        except DiagramFileError as exc:
            raise DiagramFileError(f"vertex {vid!r}: {exc}", where) from None

    name = doc.get("name", "")
    if not isinstance(name, str):
        raise DiagramFileError("'name' must be a string", _line_of(text, '"name"'))
    scale = doc.get("mass_scale", 1.0)
    if not isinstance(scale, (int, float)) or isinstance(scale, bool) or scale <= 0:
        raise DiagramFileError("'mass_scale' must be a positive number", _line_of(text, '"mass_scale"'))

    try:
        g = FeynmanGraph(tuple(vertices), internal, external)
    except GraphError as exc:
        raise DiagramFileError(str(exc)) from None
    for vid, a in arities.items():
        if a != g.arity(vid):
            raise DiagramFileError(
                f"vertex {vid!r}: declared arity {a} but {g.arity(vid)} line ends meet there",
                _line_of(text, f'"{vid}"', start=vpos),
            )
    try:
        return FeynmanDiagram(g, ops, masses, name=name, mass_scale=float(scale))
    except GraphError as exc:
        msg = str(exc)
        m = re.match(r"vertex '([^']+)'", msg)
        where = _line_of(text, f'"{m.group(1)}"', start=opos) if m and opos >= 0 else None
        raise DiagramFileError(msg, where) from None


def parse_diagram_file(path: str | Path) -> FeynmanDiagram:
    """Read and validate a diagram file (connectivity is not required here)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DiagramFileError(f"cannot read {p}: {exc.strerror}") from None
    try:
        return parse_diagram(text)
    except DiagramFileError as exc:
        raise DiagramFileError(f"{p.name}: {exc}") from None


def diagram_to_dict(d: FeynmanDiagram) -> dict[str, Any]:
    g = d.graph
    out: dict[str, Any] = {"name": d.name}
    if d.mass_scale != 1.0:
        out["mass_scale"] = d.mass_scale
    out["vertices"] = list(g.vertices)
    out["internal_lines"] = [
        {"id": r, "from": a, "to": b, "mass": d.masses[r]} for r, (a, b) in g.internal.items()
    ]
    out["external_lines"] = [
        {"id": r, "vertex": v, "direction": s} for r, (v, s) in g.external.items()
    ]
    out["vertex_ops"] = {v: d.vertex_ops[v].to_expression() for v in g.vertices}
    return out


def serialize_diagram(d: FeynmanDiagram) -> str:
    """Canonical text: two-space JSON, fixed key order, trailing newline."""
    return json.dumps(diagram_to_dict(d), indent=2) + "\n"


def parse_point(spec: str | Mapping[str, Any], d: FeynmanDiagram) -> dict[str, list[float]]:
    """External momenta from ``"e1=0.5;e2=-0.5"`` or ``"e1=1,0,0,0;..."`` (or a mapping).

    A scalar ``x`` means ``(x, 0, 0, 0)``.  If exactly one external momentum is
    missing it is fixed by conservation (all momenta are incoming).
    """
    if isinstance(spec, str):
        items = {}
        for part in filter(None, (s.strip() for s in spec.split(";"))):
            if "=" not in part:
                raise ValueError(f"momentum assignment {part!r} must look like e1=0.5 or e1=1,0,0,0")
            k, v = (x.strip() for x in part.split("=", 1))
            try:
                items[k] = [float(x) for x in v.split(",")]
            except ValueError:
                raise ValueError(f"momentum {k!r}: components must be numbers") from None
    else:
        items = {k: list(v) if hasattr(v, "__len__") else [v] for k, v in spec.items()}
    exts = list(d.external)
    out = {}
    for k, v in items.items():
        if k not in exts:
            raise ValueError(f"unknown external line {k!r}")
        if len(v) == 1:
            v = [v[0], 0.0, 0.0, 0.0]
        if len(v) != 4:
            raise ValueError(f"momentum {k!r} needs 1 or 4 components")
        out[k] = [float(x) for x in v]
    missing = [e for e in exts if e not in out]
    if len(missing) == 1:
        out[missing[0]] = [-sum(out[e][i] for e in out) + 0.0 for i in range(4)]
    return {e: out[e] for e in exts if e in out}
