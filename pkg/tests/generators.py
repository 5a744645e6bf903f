"""Random well-typed models and queries for differential and property tests.

Everything is driven by a ``random.Random`` so a failing case is reproduced
from its seed alone.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta

from aiql.metamodel import (
    Schema, all_attributes, all_references, is_subtype, relation_names, resolve_relation,
    schema_from_dict,
)
from aiql.modelstore import model_from_dict

# richer than the shipped schema: every attribute type, a one-valued self
# reference, and shortcuts of both bounds
RICH_SCHEMA_DOC = {
    "classes": [
        {"name": "Node", "abstract": True,
         "attributes": [
             {"name": "Name", "type": "String"},
             {"name": "Size", "type": "Int"},
             {"name": "Weight", "type": "Float"},
             {"name": "Created", "type": "Date"},
             {"name": "Active", "type": "Boolean"},
             {"name": "Level", "type": "Enum", "literals": ["LOW", "MID", "HIGH"]},
         ],
         "references": [
             {"name": "Out", "target": "Link", "upperBound": "many"},
             {"name": "Peer", "target": "Node", "upperBound": "one"},
         ]},
        {"name": "Service", "supertype": "Node",
         "attributes": [{"name": "Port", "type": "Int"}]},
        {"name": "Module", "supertype": "Node"},
        {"name": "Link",
         "attributes": [{"name": "Kind", "type": "Enum", "literals": ["A", "B"]}],
         "references": [
             {"name": "Src", "target": "Node", "upperBound": "one"},
             {"name": "Dst", "target": "Node", "upperBound": "one"},
         ]},
    ],
    "shortcuts": [
        {"name": "Next", "source": "Node", "path": ["Out", "Dst"]},
        {"name": "PeerOfPeer", "source": "Node", "path": ["Peer", "Peer"]},
    ],
}


def rich_schema() -> Schema:
    return schema_from_dict(RICH_SCHEMA_DOC)


NAMES = ["a", "b", "ab", "ba", "abc", "server", "client", "FooHandler", ""]
REGEXES = ["a.*", ".*b", "ab", "[ab]+", "server", ".*Handler", "", "a|b", "(ab)*"]
DATES = [datetime(2020, 1, 1) + timedelta(days=d, seconds=s) for d in (0, 31, 400) for s in (0, 59)]
OPS = ["<", "<=", "=", ">", ">="]


def _value(rng: random.Random, attr):
    if rng.random() < 0.15:
        return None
    t = attr.type
    if t == "String":
        return rng.choice(NAMES)
    if t == "Int":
        return rng.randint(-3, 6)
    if t == "Float":
        return rng.choice([-1.5, 0.0, 0.5, 1.0, 2.25, 3.0])
    if t == "Date":
        return rng.choice(DATES).strftime("%Y-%m-%dT%H:%M:%S")
    if t == "Boolean":
        return rng.random() < 0.5
    return rng.choice(attr.literals)


def random_model_doc(rng: random.Random, schema: Schema, max_elements: int = 200) -> dict:
    concrete = [c.name for c in schema.classes if not c.abstract]
    n_versions = rng.randint(1, 3)
    budget = rng.randint(0, max_elements)
    sizes = [budget // n_versions] * n_versions
    versions = []
    for index, size in enumerate(sizes, start=1):
        elements = []
        for i in range(size):
            cls = rng.choice(concrete)
            attrs = {a.name: _value(rng, a) for a in all_attributes(schema, cls)}
            elements.append({"id": f"e{i:03d}", "class": cls, "attributes": attrs, "references": {}})
        for el in elements:
            for ref in all_references(schema, el["class"]):
                pool = [o["id"] for o in elements if is_subtype(schema, o["class"], ref.target)]
                if not pool:
                    el["references"][ref.name] = []
                elif ref.many:
                    el["references"][ref.name] = rng.sample(pool, min(len(pool), rng.randint(0, 4)))
                else:
                    el["references"][ref.name] = [] if rng.random() < 0.2 else [rng.choice(pool)]
        rng.shuffle(elements)  # file order must not leak into results
        versions.append({"index": index, "elements": elements})
    return {"name": "random", "versions": versions}


def random_model(rng: random.Random, schema: Schema, max_elements: int = 200):
    return model_from_dict(random_model_doc(rng, schema, max_elements), schema)


# -- queries -------------------------------------------------------------------------


def _arith(rng: random.Random, is_float: bool, depth: int = 0) -> str:
    if depth >= 2 or rng.random() < 0.55:
        if is_float:
            num = rng.choice(["0.5", "1.0", "2.25", "3.0", "1.5"])
        else:
            num = str(rng.randint(0, 6))
        return ("-" + num) if rng.random() < 0.15 else num
    op = rng.choice("+-*/")
    left = _arith(rng, is_float, depth + 1)
    right = _arith(rng, is_float, depth + 1)
    if op == "/":
        right = rng.choice(["2.0", "0.5"] if is_float else ["1", "2", "3", "(1+1)"])
    text = f"{left} {op} {right}"
    return f"({text})" if rng.random() < 0.5 else text


def _attr_expr(rng: random.Random, attr) -> str:
    t = attr.type
    if t == "String":
        return "'" + rng.choice(REGEXES) + "'"
    if t == "Int":
        return f"{rng.choice(OPS)} {_arith(rng, False)}"
    if t == "Float":
        return f"{rng.choice(OPS)} {_arith(rng, True)}"
    if t == "Date":
        return f"{rng.choice(OPS)} {rng.choice(DATES).strftime('%Y-%m-%dT%H:%M:%S')}"
    if t == "Boolean":
        return rng.choice(["true", "false"])
    return rng.choice(attr.literals)


def _quantifier(rng: random.Random) -> str:
    kind = rng.choice(["EXISTS", "FOR_ALL", "COUNT", "RANGE"])
    if kind == "COUNT":
        return f"COUNT({rng.randint(0, 3)})"
    if kind == "RANGE":
        a = rng.randint(0, 2)
        return f"RANGE({a},{a + rng.randint(0, 2)})"
    return kind


TEMPLATE_IDS = ["t0", "t1", "T2", "item", "^LIST", "X"]


def random_query(rng: random.Random, schema: Schema, max_templates: int = 4) -> str:
    """Text of a query that validates against ``schema`` without errors."""
    n = rng.randint(1, max_templates)
    ids = rng.sample(TEMPLATE_IDS, n)  # index order is a valid dependency order
    classes = [rng.choice(schema.class_names) for _ in range(n)]
    bodies = []
    for k in range(n):
        cls = classes[k]
        groups = []
        if rng.random() < 0.75:
            for _ in range(rng.randint(1, 2)):
                members = []
                for _ in range(rng.randint(1, 3)):
                    neg = "NOT " if rng.random() < 0.25 else ""
                    rels = []
                    for r in relation_names(schema, cls):
                        rel = resolve_relation(schema, cls, r)
                        ok = [j for j in range(k) if is_subtype(schema, classes[j], rel.target)]
                        if ok:
                            rels.append((rel, ok))
                    attrs = all_attributes(schema, cls)
                    if rels and (not attrs or rng.random() < 0.45):
                        rel, ok = rng.choice(rels)
                        target = ids[rng.choice(ok)]
                        quant = _quantifier(rng) + " " if rel.many else ""
                        members.append(f"{neg}{quant}{rel.name} {target}")
                    elif attrs:
                        a = rng.choice(attrs)
                        members.append(f"{neg}{a.name} {_attr_expr(rng, a)}")
                if members:
                    groups.append("(" + " ".join(members) + ")")
        restr = " RESTRICTIONS: " + " OR ".join(groups) if groups else ""
        bodies.append(f"LIST {cls} {ids[k]}{restr};")
    order = list(range(n))
    rng.shuffle(order)  # forward references must work too
    version = rng.choice(["FIRST", "LAST", f"{rng.choice(OPS)} {rng.randint(0, 3)}", ">= 1 + 0"])
    lines = ['MODEL "random.model";', f"VERSION {version};"] + [bodies[i] for i in order]
    outs = rng.sample(range(n), rng.randint(1, n))
    for i in outs:
        out = f"OUTPUT {ids[i]}"
        attrs = [a.name for a in all_attributes(schema, classes[i])]
        if attrs and rng.random() < 0.4:
            keys = rng.sample(attrs, rng.randint(1, min(2, len(attrs))))
            out += " ORDER_BY " + ", ".join(f"{k} {rng.choice(['ASC', 'DESC'])}" for k in keys)
        if attrs and rng.random() < 0.3:
            out += " ATTRIBUTE " + ", ".join(rng.sample(attrs, rng.randint(1, len(attrs))))
        lines.append(out + ";")
    return "\n".join(lines) + "\n"
