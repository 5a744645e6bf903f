"""Query evaluation over versioned models.

Templates are evaluated once per selected version, in dependency order, and
each template's match set is memoized so reference restrictions only do set
lookups.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass

from aiql import ast
from aiql.metamodel import RefDef, Schema
from aiql.modelstore import ModelElement, VersionedModel, VersionSnapshot, elements_of_type, select_versions
from aiql.validator import ResolvedAttr, ResolvedRef, ValidatedQuery


@dataclass(frozen=True)
class MatchSets:
    version: int
    sets: dict  # template identifier -> list[ModelElement], ordered by id

    def ids(self, template: str) -> list[str]:
        return [e.id for e in self.sets[template]]


@dataclass(frozen=True)
class QueryResult:
    per_version: tuple[MatchSets, ...]

    def ids(self) -> list[dict[str, list[str]]]:
        return [{t: [e.id for e in els] for t, els in ms.sets.items()} for ms in self.per_version]


@functools.lru_cache(maxsize=256)
def _regex(pattern: str) -> re.Pattern:
    return re.compile(pattern)


def eval_attr_expr(value, expr: ast.AttrExpr) -> bool:
    """Test one attribute value against a restriction expression.

    ``None`` (an explicit null in the model) never satisfies an expression.
    Strings must match the whole pattern.
    """
    if value is None:
        return False
    if isinstance(expr, ast.BoolLit):
        return value == expr.value
    if isinstance(expr, ast.StringRegex):
        return _regex(expr.pattern).fullmatch(value) is not None
    if isinstance(expr, (ast.IntCompare, ast.FloatCompare)):
        return ast.compare(expr.op, value, ast.eval_arith(expr.rhs))
    if isinstance(expr, ast.DateCompare):
        return ast.compare(expr.op, value, expr.value)
    if isinstance(expr, ast.EnumLit):
        return value == expr.literal
    raise TypeError(f"unsupported expression {expr!r}")


def _attr_test(res: ResolvedAttr):
    name, expr, folded = res.attr.name, res.expr, res.value
    if isinstance(expr, ast.StringRegex):
        fullmatch = folded.fullmatch
        return lambda e: (v := e.attributes.get(name)) is not None and fullmatch(v) is not None
    if isinstance(expr, (ast.IntCompare, ast.FloatCompare, ast.DateCompare)):
        op = expr.op
        return lambda e: (v := e.attributes.get(name)) is not None and ast.compare(op, v, folded)
    return lambda e: (v := e.attributes.get(name)) is not None and v == folded


class _VersionEvaluator:
    def __init__(self, query: ValidatedQuery, snapshot: VersionSnapshot, schema: Schema):
        self.q = query
        self.snap = snapshot
        self.schema = schema
        self.matched: dict[str, set[str]] = {}
        self.reach_cache: dict[tuple[str, str], tuple[str, ...]] = {}

    def targets(self, element: ModelElement, relation) -> tuple[str, ...]:
        if isinstance(relation, RefDef):
            return element.references.get(relation.name, ())
        key = (relation.name, element.id)
        hit = self.reach_cache.get(key)
        if hit is not None:
            return hit
        frontier = [element.id]
        for step in relation.path:
            seen: dict[str, None] = {}
            for eid in frontier:
                el = self.snap.elements[eid]
                for t in el.references.get(step, ()):
                    seen[t] = None
            frontier = list(seen)
        result = tuple(frontier)
        self.reach_cache[key] = result
        return result

    def ref_test(self, res: ResolvedRef):
        matched = self.matched[res.template]
        rel = res.relation
        q = res.quantifier
        if isinstance(rel, RefDef):
            name = rel.name
            get_targets = lambda e: e.references.get(name, ())  # noqa: E731
        else:
            get_targets = lambda e: self.targets(e, rel)  # noqa: E731
        if q is None:
            def test(e):
                ts = get_targets(e)
                return len(ts) == 1 and ts[0] in matched
        elif q.kind == "EXISTS":
            def test(e):
                return any(t in matched for t in get_targets(e))
        elif q.kind == "FOR_ALL":
            def test(e):
                return all(t in matched for t in get_targets(e))
        else:
            low = q.low
            high = q.low if q.kind == "COUNT" else q.high

            def test(e):
                n = sum(1 for t in get_targets(e) if t in matched)
                return low <= n <= high
        return test

    def compile(self, disjunction):
        conjs = []
        for conj in disjunction:
            tests = []
            for m in conj:
                fn = _attr_test(m.body) if isinstance(m.body, ResolvedAttr) else self.ref_test(m.body)
                if m.negated:
                    fn = (lambda f: (lambda e: not f(e)))(fn)
                tests.append(fn)
            conjs.append(tests)
        if len(conjs) == 1:
            tests = conjs[0]
            if len(tests) == 1:
                return tests[0]
            return lambda e: all(t(e) for t in tests)
        return lambda e: any(all(t(e) for t in tests) for tests in conjs)

    def run(self) -> MatchSets:
        sets = {}
        for tid in self.q.order:
            rt = self.q.templates[tid]
            extent = elements_of_type(self.snap, rt.cls.name, self.schema)
            if rt.disjunction is None:
                found = extent
            else:
                pred = self.compile(rt.disjunction)
                found = [e for e in extent if pred(e)]
            sets[tid] = found
            self.matched[tid] = {e.id for e in found}
        # declaration order for stable iteration by callers
        ordered = {t.identifier: sets[t.identifier] for t in self.q.ast.templates}
        return MatchSets(self.snap.index, ordered)


def evaluate_version(query: ValidatedQuery, snapshot: VersionSnapshot, schema: Schema) -> MatchSets:
    return _VersionEvaluator(query, snapshot, schema).run()


def evaluate(query: ValidatedQuery, model: VersionedModel, schema: Schema) -> QueryResult:
    indices = select_versions(query.ast.version, model.count)
    return QueryResult(tuple(evaluate_version(query, model.version(i), schema) for i in indices))
