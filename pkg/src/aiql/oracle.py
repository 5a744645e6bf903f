"""Brute-force reference evaluator used to cross-check :mod:`aiql.evaluator`.

Deliberately naive: no extent index, no memoized match sets, no compiled
predicates.  Every template is recomputed by scanning all elements of the
snapshot, and referenced templates are recomputed on demand.  Only the
resolved names from validation are shared with the fast path.
"""

from __future__ import annotations

import re
from fractions import Fraction

from aiql import ast
from aiql.errors import EmptySelectionError
from aiql.evaluator import MatchSets, QueryResult
from aiql.metamodel import RefDef, Schema
from aiql.modelstore import VersionedModel, VersionSnapshot
from aiql.validator import ResolvedAttr, ValidatedQuery


def _arith(node):
    if isinstance(node, ast.Num):
        return node.value
    a, b = _arith(node.left), _arith(node.right)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if isinstance(a, int) and isinstance(b, int):
        return int(Fraction(a, b))
    return a / b


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _versions(selector: ast.VersionSelector, n: int) -> list[int]:
    if selector.kind == "first":
        return [1]
    if selector.kind == "last":
        return [n]
    rhs = _arith(selector.rhs)
    out = [i for i in range(1, n + 1) if _OPS[selector.op](i, rhs)]
    if not out:
        raise EmptySelectionError("VERSION expression selects no version")
    return out


def _is_a(schema: Schema, cls: str, wanted: str) -> bool:
    while cls is not None:
        if cls == wanted:
            return True
        cls = schema.get_class(cls).supertype
    return False


def _attr_holds(element, res: ResolvedAttr) -> bool:
    value = element.attributes.get(res.attr.name)
    if value is None:
        return False
    expr = res.expr
    if isinstance(expr, ast.StringRegex):
        return re.fullmatch(expr.pattern, value) is not None
    if isinstance(expr, (ast.IntCompare, ast.FloatCompare)):
        return _OPS[expr.op](value, _arith(expr.rhs))
    if isinstance(expr, ast.DateCompare):
        return _OPS[expr.op](value, expr.value)
    if isinstance(expr, ast.BoolLit):
        return value is expr.value
    return value == expr.literal


def _reach(snapshot: VersionSnapshot, element, relation) -> set[str]:
    path = [relation.name] if isinstance(relation, RefDef) else list(relation.path)
    current = {element.id}
    for step in path:
        nxt = set()
        for eid in current:
            nxt.update(snapshot.elements[eid].references.get(step, ()))
        current = nxt
    return current


def _matches(q: ValidatedQuery, snapshot: VersionSnapshot, schema: Schema, tid: str) -> list:
    rt = q.templates[tid]
    referenced = {}
    for dep in rt.dependencies():
        referenced[dep] = {e.id for e in _matches(q, snapshot, schema, dep)}

    def member_holds(element, m) -> bool:
        body = m.body
        if isinstance(body, ResolvedAttr):
            ok = _attr_holds(element, body)
        else:
            targets = _reach(snapshot, element, body.relation)
            good = targets & referenced[body.template]
            quant = body.quantifier
            if quant is None:
                ok = len(targets) == 1 and targets <= referenced[body.template]
            elif quant.kind == "EXISTS":
                ok = len(good) >= 1
            elif quant.kind == "FOR_ALL":
                ok = good == targets
            elif quant.kind == "COUNT":
                ok = len(good) == quant.low
            else:
                ok = quant.low <= len(good) <= quant.high
        return not ok if m.negated else ok

    out = []
    for eid in sorted(snapshot.elements):
        element = snapshot.elements[eid]
        if not _is_a(schema, element.class_name, rt.cls.name):
            continue
        if rt.disjunction is None or any(all(member_holds(element, m) for m in conj)
                                         for conj in rt.disjunction):
            out.append(element)
    return out


def oracle_evaluate(q: ValidatedQuery, model: VersionedModel, schema: Schema) -> QueryResult:
    per_version = []
    for idx in _versions(q.ast.version, len(model.versions)):
        snapshot = next(s for s in model.versions if s.index == idx)
        sets = {t.identifier: _matches(q, snapshot, schema, t.identifier) for t in q.ast.templates}
        per_version.append(MatchSets(idx, sets))
    return QueryResult(tuple(per_version))
