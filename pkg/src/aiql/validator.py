"""Static semantics: resolve every name in a query against a schema.

All problems are collected in one pass.  A query that validates can be
evaluated without any name, type or template-resolution failure.
"""

from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from aiql import ast
from aiql.errors import Position, QueryValidationError
from aiql.metamodel import (
    AttrDef, ClassDef, Relation, Schema, find_attribute, is_subtype,
    relation_names, resolve_relation,
)
from aiql.errors import SchemaError

_EXPR_FOR_TYPE = {
    "Boolean": ast.BoolLit,
    "String": ast.StringRegex,
    "Int": ast.IntCompare,
    "Float": ast.FloatCompare,
    "Date": ast.DateCompare,
    "Enum": ast.EnumLit,
}
_EXPR_NAMES = {
    ast.BoolLit: "boolean literal",
    ast.StringRegex: "string",
    ast.IntCompare: "integer comparison",
    ast.FloatCompare: "float comparison",
    ast.DateCompare: "date comparison",
    ast.EnumLit: "enum literal",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    pos: Position
    template: Optional[str] = None

    def render(self, file: str = "<query>") -> str:
        return f"{self.severity} {file}:{self.pos.line}:{self.pos.col} {self.code} {self.message}"

    def as_dict(self) -> dict:
        return {
            "severity": self.severity, "code": self.code, "message": self.message,
            "line": self.pos.line, "col": self.pos.col, "template": self.template,
        }


def diagnostics_json(diags, file: str = "<query>") -> str:
    return json.dumps([dict(d.as_dict(), file=file) for d in diags], indent=2)


@dataclass(frozen=True)
class ResolvedAttr:
    attr: AttrDef
    expr: ast.AttrExpr
    value: object = None  # folded arithmetic, compiled regex or enum literal


@dataclass(frozen=True)
class ResolvedRef:
    relation: Relation
    quantifier: Optional[ast.Quantifier]
    template: str


@dataclass(frozen=True)
class ResolvedMember:
    negated: bool
    body: Union[ResolvedAttr, ResolvedRef]


@dataclass(frozen=True)
class ResolvedTemplate:
    ast: ast.TemplateAst
    cls: ClassDef
    disjunction: Optional[tuple[tuple[ResolvedMember, ...], ...]]

    @property
    def identifier(self) -> str:
        return self.ast.identifier

    def dependencies(self) -> list[str]:
        deps: list[str] = []
        for conj in self.disjunction or ():
            for m in conj:
                if isinstance(m.body, ResolvedRef) and m.body.template not in deps:
                    deps.append(m.body.template)
        return deps


@dataclass(frozen=True)
class ValidatedQuery:
    ast: ast.QueryAst
    templates: dict
    order: tuple[str, ...]
    warnings: tuple[Diagnostic, ...] = field(default=())


class _Checker:
    def __init__(self, query: ast.QueryAst, schema: Schema):
        self.q = query
        self.schema = schema
        self.diags: list[Diagnostic] = []

    def error(self, code, message, pos, template=None):
        self.diags.append(Diagnostic("error", code, message, pos, template))

    def warn(self, code, message, pos, template=None):
        self.diags.append(Diagnostic("warning", code, message, pos, template))

    def run(self) -> Optional[ValidatedQuery]:
        q, schema = self.q, self.schema
        if q.version.kind == "filter":
            try:
                ast.eval_arith(q.version.rhs)
            except ZeroDivisionError:
                self.error("arithmetic", "division by zero in VERSION expression", q.version.pos)

        declared: dict[str, ast.TemplateAst] = {}
        for t in q.templates:
            if t.identifier in declared:
                self.error("duplicate-template", f"template identifier {t.identifier!r} is already declared",
                           t.pos, t.identifier)
            else:
                declared[t.identifier] = t

        resolved: dict[str, ResolvedTemplate] = {}
        for t in q.templates:
            if declared.get(t.identifier) is not t:
                continue
            if not schema.has_class(t.type_name):
                self.error("unknown-type", f"unknown type {t.type_name!r}; known types: "
                           + ", ".join(schema.class_names), t.type_pos, t.identifier)
                continue
            cls = schema.get_class(t.type_name)
            disj = None
            if t.restrictions is not None:
                disj = tuple(
                    tuple(m for m in (self.member(t, cls, mem, declared) for mem in conj.members) if m)
                    for conj in t.restrictions.conjunctions
                )
            resolved[t.identifier] = ResolvedTemplate(t, cls, disj)

        referenced = set()
        for rt in resolved.values():
            referenced.update(rt.dependencies())

        outputs = set()
        for o in q.outputs:
            t = declared.get(o.template)
            if t is None:
                self.error("unknown-output", f"OUTPUT names undeclared template {o.template!r}", o.pos)
                continue
            outputs.add(o.template)
            if not schema.has_class(t.type_name):
                continue
            for key in o.order_by:
                if find_attribute(schema, t.type_name, key.attribute) is None:
                    self.error("unknown-attribute", f"ORDER_BY {key.attribute!r} is not an attribute of "
                               f"{t.type_name}", key.pos, o.template)
            for name, pos in zip(o.projection or (), o.projection_pos or [o.pos] * len(o.projection or ())):
                if find_attribute(schema, t.type_name, name) is None:
                    self.error("unknown-attribute", f"ATTRIBUTE {name!r} is not an attribute of "
                               f"{t.type_name}", pos, o.template)

        for t in q.templates:
            if t.identifier not in outputs and t.identifier not in referenced:
                self.warn("unused-template", f"template {t.identifier!r} is never output or referenced",
                          t.pos, t.identifier)

        order = self.order(resolved) if len(resolved) == len(declared) else ()
        errors = [d for d in self.diags if d.severity == "error"]
        if errors:
            return None
        warnings = tuple(d for d in self.diags if d.severity == "warning")
        return ValidatedQuery(q, resolved, order, warnings)

    def member(self, t, cls: ClassDef, mem: ast.Member, declared) -> Optional[ResolvedMember]:
        body = mem.body
        if isinstance(body, ast.AttrRestriction):
            adef = find_attribute(self.schema, cls.name, body.name)
            if adef is None and isinstance(body.expr, ast.EnumLit) and body.name in relation_names(self.schema, cls.name):
                # `Rel TEMPLATE` lexes like an enum comparison; it is a reference
                body = ast.RefRestriction(None, body.name, body.expr.literal, pos=body.pos,
                                          template_pos=body.expr.pos)
            else:
                res = self.attribute(t, cls, body, adef)
                return ResolvedMember(mem.negated, res) if res else None
        res = self.reference(t, cls, body, declared)
        return ResolvedMember(mem.negated, res) if res else None

    def attribute(self, t, cls, body: ast.AttrRestriction, adef: AttrDef | None):
        tid = t.identifier
        if adef is None:
            hint = ""
            if body.name in relation_names(self.schema, cls.name):
                hint = " (it is a reference; write `<reference> <template>`)"
            self.error("unknown-attribute", f"{cls.name} has no attribute {body.name!r}{hint}", body.pos, tid)
            return None
        expected = _EXPR_FOR_TYPE[adef.type]
        expr = body.expr
        if not isinstance(expr, expected):
            self.error("type-mismatch", f"attribute {adef.name} is {adef.type} but the restriction is a "
                       f"{_EXPR_NAMES[type(expr)]}; expected a {_EXPR_NAMES[expected]}", expr.pos, tid)
            return None
        value = None
        if isinstance(expr, ast.StringRegex):
            try:
                value = re.compile(expr.pattern)
            except re.error as exc:
                self.error("bad-regex", f"invalid regular expression {expr.pattern!r}: {exc}", expr.pos, tid)
                return None
        elif isinstance(expr, (ast.IntCompare, ast.FloatCompare)):
            try:
                value = ast.eval_arith(expr.rhs)
            except ZeroDivisionError:
                self.error("arithmetic", "division by zero", expr.pos, tid)
                return None
        elif isinstance(expr, ast.EnumLit):
            if expr.literal not in adef.literals:
                self.error("enum-literal", f"{expr.literal} is not a literal of {adef.name}; expected one of "
                           + ", ".join(adef.literals), expr.pos, tid)
                return None
            value = expr.literal
        elif isinstance(expr, ast.DateCompare):
            value = expr.value
        elif isinstance(expr, ast.BoolLit):
            value = expr.value
        return ResolvedAttr(adef, expr, value)

    def reference(self, t, cls, body: ast.RefRestriction, declared):
        tid = t.identifier
        try:
            rel = resolve_relation(self.schema, cls.name, body.relation)
        except SchemaError:
            hint = ""
            if find_attribute(self.schema, cls.name, body.relation) is not None:
                hint = " (it is an attribute; its value must be a literal or comparison)"
            self.error("unknown-relation", f"{cls.name} has no reference or shortcut {body.relation!r}{hint}",
                       body.pos, tid)
            return None
        ok = True
        if rel.many and body.quantifier is None:
            self.error("quantifier-required", f"quantifier required: {rel.name} has upper bound many",
                       body.pos, tid)
            ok = False
        elif not rel.many and body.quantifier is not None:
            self.error("quantifier-forbidden", f"no quantifier allowed: {rel.name} has upper bound one",
                       body.quantifier.pos, tid)
            ok = False
        target = declared.get(body.template)
        if target is None:
            self.error("unresolved-template", f"reference to undeclared template {body.template!r}",
                       body.template_pos, tid)
            ok = False
        elif self.schema.has_class(target.type_name) and not is_subtype(self.schema, target.type_name, rel.target):
            self.error("template-type", f"template {body.template!r} lists {target.type_name}, but "
                       f"{rel.name} leads to {rel.target}", body.template_pos, tid)
            ok = False
        return ResolvedRef(rel, body.quantifier, body.template) if ok else None

    def order(self, resolved: dict[str, ResolvedTemplate]) -> tuple[str, ...]:
        ids = list(resolved)
        rank = {tid: i for i, tid in enumerate(ids)}
        deps = {tid: [d for d in resolved[tid].dependencies() if d in resolved] for tid in ids}
        waiting = {tid: len(deps[tid]) for tid in ids}
        users: dict[str, list[str]] = {tid: [] for tid in ids}
        for tid in ids:
            for d in deps[tid]:
                users[d].append(tid)
        ready = [(rank[t], t) for t in ids if waiting[t] == 0]
        heapq.heapify(ready)
        out = []
        while ready:
            _, tid = heapq.heappop(ready)
            out.append(tid)
            for u in users[tid]:
                waiting[u] -= 1
                if waiting[u] == 0:
                    heapq.heappush(ready, (rank[u], u))
        if len(out) < len(ids):
            stuck = [t for t in ids if t not in out]
            for tid in stuck:
                self.error("template-cycle", f"template {tid!r} is part of a reference cycle among "
                           + ", ".join(stuck), resolved[tid].ast.pos, tid)
        return tuple(out)


def check_query(query: ast.QueryAst, schema: Schema):
    """Validate and return ``(validated or None, diagnostics)`` without raising."""
    checker = _Checker(query, schema)
    result = checker.run()
    diags = sorted(checker.diags, key=lambda d: (d.pos.offset, d.severity, d.code, d.message))
    return result, diags


def validate_query(query: ast.QueryAst, schema: Schema) -> ValidatedQuery:
    result, diags = check_query(query, schema)
    if result is None:
        raise QueryValidationError([d for d in diags if d.severity == "error"])
    return result


def template_order(validated: ValidatedQuery) -> list[str]:
    return list(validated.order)
