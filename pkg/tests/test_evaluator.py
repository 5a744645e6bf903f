import random
from datetime import datetime

import pytest

from aiql import ast
from aiql.errors import EmptySelectionError
from aiql.evaluator import eval_attr_expr, evaluate, evaluate_version
from aiql.metamodel import all_attributes, is_subtype
from aiql.modelstore import VersionSnapshot, elements_of_type, model_from_dict
from aiql.parser import parse_query
from aiql.validator import validate_query

from conftest import header
from generators import _attr_expr, random_model, random_model_doc, random_query, rich_schema


def run(text, model, schema):
    return evaluate(validate_query(parse_query(text), schema), model, schema).ids()


def test_example_on_example_model(example_text, system_model, schema):
    assert run(example_text, system_model, schema) == [{"serverComponent": ["server"], "system": ["system"]}]


def test_list_all_components(system_model, schema):
    text = header() + "LIST TechnicalComponent comp; OUTPUT comp;"
    assert run(text, system_model, schema) == [{"comp": ["client", "server"]}]


def test_empty_snapshot(example_text, schema):
    q = validate_query(parse_query(example_text), schema)
    ms = evaluate_version(q, VersionSnapshot(1, {}), schema)
    assert ms.sets == {"serverComponent": [], "system": []}


@pytest.mark.parametrize("value, expr, expected", [
    ("server", ast.StringRegex("server"), True),
    ("RequestHandler", ast.StringRegex(".*Handler"), True),
    ("RequestHandlerX", ast.StringRegex(".*Handler"), False),
    ("xserver", ast.StringRegex("server"), False),
    (5, ast.IntCompare(">=", ast.BinOp("+", ast.Num(2), ast.Num(3))), True),
    (4, ast.IntCompare(">=", ast.BinOp("+", ast.Num(2), ast.Num(3))), False),
    (-2, ast.IntCompare("=", ast.BinOp("/", ast.Num(-7), ast.Num(3))), True),
    (1.5, ast.FloatCompare("<", ast.Num(2.0)), True),
    (datetime(2020, 1, 2), ast.DateCompare(">", datetime(2020, 1, 1)), True),
    (True, ast.BoolLit(True), True),
    (False, ast.BoolLit(True), False),
    ("CLASS", ast.EnumLit("CLASS"), True),
    ("CLASS", ast.EnumLit("LIBRARY"), False),
    (None, ast.StringRegex(".*"), False),
    (None, ast.IntCompare("<", ast.Num(0)), False),
])
def test_eval_attr_expr(value, expr, expected):
    assert eval_attr_expr(value, expr) is expected


def test_null_fails_every_expression():
    for expr in [ast.StringRegex(".*"), ast.BoolLit(False), ast.EnumLit("X"),
                 ast.IntCompare("=", ast.Num(0)), ast.DateCompare("<=", datetime.max)]:
        assert not eval_attr_expr(None, expr)


def _edge_doc(children):
    els = [{"id": "s", "class": "SoftwareSystem", "attributes": {"Name": "s"},
            "references": {"ComponentEdge": [f"e{i}" for i in range(len(children))]}}]
    for i, (cid, name) in enumerate(children):
        els.append({"id": cid, "class": "TechnicalComponent",
                    "attributes": {"Name": name, "Type": "CLASS", "Version": "1"}, "references": {"ComponentEdge": []}})
        els.append({"id": f"e{i}", "class": "ComponentEdge", "attributes": {"Kind": "CONTAINMENT"},
                    "references": {"Parent": ["s"], "Child": [cid]}})
    return {"name": "t", "versions": [{"index": 1, "elements": els}]}


@pytest.mark.parametrize("quant, expected", [
    ("EXISTS", ["s"]), ("FOR_ALL", []), ("COUNT(1)", ["s"]), ("COUNT(2)", []),
    ("RANGE(0,1)", ["s"]), ("RANGE(2,3)", []),
])
def test_quantifiers(schema, quant, expected):
    m = model_from_dict(_edge_doc([("a", "x"), ("b", "y")]), schema)
    text = header() + f"LIST TechnicalComponent t RESTRICTIONS: (Name 'x'); " \
                      f"LIST SoftwareSystem s RESTRICTIONS: ({quant} Children t); OUTPUT s;"
    assert run(text, m, schema) == [{"t": ["a"], "s": expected}]


def test_vacuous_for_all_and_empty_exists(schema):
    m = model_from_dict(_edge_doc([]), schema)
    base = header() + "LIST TechnicalComponent t; LIST SoftwareSystem s RESTRICTIONS: ({} Children t); OUTPUT s;"
    assert run(base.format("FOR_ALL"), m, schema)[0]["s"] == ["s"]
    assert run(base.format("EXISTS"), m, schema)[0]["s"] == []
    assert run(base.format("COUNT(0)"), m, schema)[0]["s"] == ["s"]


def test_unquantified_needs_exactly_one_target(schema):
    m = model_from_dict(_edge_doc([("a", "x")]), schema)
    text = header() + "LIST TechnicalComponent t RESTRICTIONS: (Name 'x'); " \
                      "LIST ComponentEdge e RESTRICTIONS: (Child t); OUTPUT e;"
    assert run(text, m, schema)[0]["e"] == ["e0"]


def test_disjunction_and_negation(system_model, schema):
    text = header() + "LIST TechnicalComponent t RESTRICTIONS: (Name 'client') OR (Name 'server'); OUTPUT t;"
    assert run(text, system_model, schema)[0]["t"] == ["client", "server"]
    text = header() + "LIST TechnicalComponent t RESTRICTIONS: (NOT Name 'client'); OUTPUT t;"
    assert run(text, system_model, schema)[0]["t"] == ["server"]


def test_version_selection(schema):
    doc = _edge_doc([("a", "x")])
    doc["versions"].append({"index": 2, "elements": []})
    m = model_from_dict(doc, schema)
    body = "LIST TechnicalComponent t; OUTPUT t;"
    assert run(header("FIRST") + body, m, schema) == [{"t": ["a"]}]
    assert run(header("LAST") + body, m, schema) == [{"t": []}]
    assert run(header(">= 1") + body, m, schema) == [{"t": ["a"]}, {"t": []}]
    with pytest.raises(EmptySelectionError):
        run(header("> 2") + body, m, schema)


# -- invariants over random models --------------------------------------------------


RICH = rich_schema()


def _attr_member(rng, cls):
    a = rng.choice(all_attributes(RICH, cls))
    return f"{a.name} {_attr_expr(rng, a)}"


@pytest.mark.parametrize("seed", range(40))
def test_not_partitions_the_extent(seed):
    rng = random.Random(seed)
    m = random_model(rng, RICH, 80)
    cls = rng.choice(RICH.class_names)
    member = _attr_member(rng, cls)
    pos = run(header(">= 1") + f"LIST {cls} t RESTRICTIONS: ({member}); OUTPUT t;", m, RICH)
    neg = run(header(">= 1") + f"LIST {cls} t RESTRICTIONS: (NOT {member}); OUTPUT t;", m, RICH)
    for p, n, snap in zip(pos, neg, m.versions):
        extent = [e.id for e in elements_of_type(snap, cls, RICH)]
        assert set(p["t"]).isdisjoint(n["t"])
        assert sorted(p["t"] + n["t"]) == extent


@pytest.mark.parametrize("seed", range(40))
def test_adding_a_member_only_shrinks(seed):
    rng = random.Random(seed)
    m = random_model(rng, RICH, 80)
    cls = rng.choice(RICH.class_names)
    a, b = _attr_member(rng, cls), _attr_member(rng, cls)
    one = run(header(">= 1") + f"LIST {cls} t RESTRICTIONS: ({a}); OUTPUT t;", m, RICH)
    two = run(header(">= 1") + f"LIST {cls} t RESTRICTIONS: ({a} {b}); OUTPUT t;", m, RICH)
    wider = run(header(">= 1") + f"LIST {cls} t RESTRICTIONS: ({a}) OR ({b}); OUTPUT t;", m, RICH)
    for x, y, z in zip(one, two, wider):
        assert set(y["t"]) <= set(x["t"]) <= set(z["t"])


@pytest.mark.parametrize("seed", range(30))
def test_results_bounded_by_extent_and_deterministic(seed):
    rng = random.Random(seed)
    m = random_model(rng, RICH, 80)
    text = random_query(rng, RICH)
    q = validate_query(parse_query(text), RICH)
    try:
        first = evaluate(q, m, RICH)
    except EmptySelectionError:
        return
    assert evaluate(q, m, RICH).ids() == first.ids()
    for ms in first.per_version:
        snap = m.version(ms.version)
        for tid, els in ms.sets.items():
            cls = q.templates[tid].cls.name
            assert all(is_subtype(RICH, e.class_name, cls) for e in els)
            assert {e.id for e in els} <= {e.id for e in elements_of_type(snap, cls, RICH)}
            assert [e.id for e in els] == sorted(e.id for e in els)


@pytest.mark.parametrize("seed", range(20))
def test_versions_evaluated_in_isolation(seed):
    rng = random.Random(seed)
    doc = random_model_doc(rng, RICH, 90)
    m = model_from_dict(doc, RICH)
    q = validate_query(parse_query(random_query(rng, RICH)), RICH)
    for snap in m.versions:
        alone = model_from_dict({"name": "one", "versions": [dict(doc["versions"][snap.index - 1], index=1)]}, RICH)
        a = evaluate_version(q, snap, RICH)
        b = evaluate_version(q, alone.version(1), RICH)
        assert {t: [e.id for e in v] for t, v in a.sets.items()} == {t: [e.id for e in v] for t, v in b.sets.items()}
