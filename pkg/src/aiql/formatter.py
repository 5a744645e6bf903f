"""Canonical pretty-printer for query syntax trees."""

from __future__ import annotations

from decimal import Decimal

from aiql import ast
from aiql.lexer import KEYWORDS
from aiql.metamodel import ENUM_LITERAL_RE
from aiql.modelstore import format_date

INDENT = "    "
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def quote(value: str, q: str = "'") -> str:
    return q + value.replace("\\", "\\\\").replace(q, "\\" + q) + q


def name(word: str, escaped: bool = False) -> str:
    return "^" + word if escaped or word in KEYWORDS else word


def _num(value) -> str:
    if isinstance(value, float):
        text = format(Decimal(repr(value)), "f")
        return text if "." in text else text + ".0"
    return str(value)


def format_arith(node: ast.Arith) -> str:
    if isinstance(node, ast.Num):
        return _num(node.value)
    prec = _PREC[node.op]
    left = format_arith(node.left)
    right = format_arith(node.right)
    if isinstance(node.left, ast.BinOp) and _PREC[node.left.op] < prec:
        left = f"({left})"
    if isinstance(node.right, ast.BinOp) and _PREC[node.right.op] <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def format_attr_expr(expr: ast.AttrExpr) -> str:
    if isinstance(expr, ast.BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, ast.StringRegex):
        return quote(expr.pattern)
    if isinstance(expr, ast.EnumLit):
        return expr.literal
    if isinstance(expr, ast.DateCompare):
        return f"{expr.op} {format_date(expr.value)}"
    return f"{expr.op} {format_arith(expr.rhs)}"


def format_quantifier(q: ast.Quantifier) -> str:
    if q.kind == "COUNT":
        return f"COUNT({q.low})"
    if q.kind == "RANGE":
        return f"RANGE({q.low}, {q.high})"
    return q.kind


def format_member(m: ast.Member) -> str:
    body = m.body
    if isinstance(body, ast.AttrRestriction):
        text = f"{name(body.name)} {format_attr_expr(body.expr)}"
    else:
        # an uppercase template name would otherwise read back as an enum literal
        target = name(body.template, escaped=bool(ENUM_LITERAL_RE.match(body.template)))
        text = f"{name(body.relation)} {target}"
        if body.quantifier is not None:
            text = f"{format_quantifier(body.quantifier)} {text}"
    return f"NOT {text}" if m.negated else text


def format_disjunction(d: ast.Disjunction) -> str:
    groups = ["(" + " ".join(format_member(m) for m in c.members) + ")" for c in d.conjunctions]
    return " OR ".join(groups)


def format_version(v: ast.VersionSelector) -> str:
    if v.kind == "first":
        return "FIRST"
    if v.kind == "last":
        return "LAST"
    return f"{v.op} {format_arith(v.rhs)}"


def format_template(t: ast.TemplateAst) -> str:
    head = f"LIST {name(t.type_name)} {name(t.identifier, t.escaped)}"
    if t.restrictions is None:
        return head + ";"
    return f"{head} RESTRICTIONS:\n{INDENT}{format_disjunction(t.restrictions)};"


def format_output(o: ast.OutputAst) -> str:
    text = f"OUTPUT {name(o.template)}"
    if o.order_by:
        keys = ", ".join(f"{name(k.attribute)} {'DESC' if k.descending else 'ASC'}" for k in o.order_by)
        text += f" ORDER_BY {keys}"
    if o.projection:
        text += " ATTRIBUTE " + ", ".join(name(a) for a in o.projection)
    return text + ";"


def format_query(q: ast.QueryAst) -> str:
    parts = [f"MODEL {quote(q.model_path, chr(34))};\nVERSION {format_version(q.version)};"]
    parts.extend(format_template(t) for t in q.templates)
    parts.append("\n".join(format_output(o) for o in q.outputs))
    return "\n\n".join(parts) + "\n"
