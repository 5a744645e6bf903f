"""Syntax tree for AIQL queries.

Source positions are carried on nodes for diagnostics but excluded from
equality, so two parses of differently laid out text compare equal when
they mean the same query.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Union

from aiql.errors import Position

COMPARATORS = ("<=", "<", "=", ">", ">=")

NOPOS = Position(0, 1, 1)


def _pos():
    return field(default=NOPOS, compare=False, repr=False)


# -- closed arithmetic ------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Union[int, float]
    pos: Position = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Arith"
    right: "Arith"
    pos: Position = _pos()


Arith = Union[Num, BinOp]


def eval_arith(node: Arith) -> Union[int, float]:
    """Evaluate a closed arithmetic expression.

    Integer division truncates toward zero. Division by zero raises
    ``ZeroDivisionError``.
    """
    if isinstance(node, Num):
        return node.value
    a = eval_arith(node.left)
    b = eval_arith(node.right)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if isinstance(a, int) and isinstance(b, int):
        if b == 0:
            raise ZeroDivisionError("integer division by zero")
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    return a / b


def arith_is_float(node: Arith) -> bool | None:
    """True if all literals are floats, False if all ints, None if mixed."""
    if isinstance(node, Num):
        return isinstance(node.value, float)
    left, right = arith_is_float(node.left), arith_is_float(node.right)
    return left if left == right else None


def compare(op: str, a, b) -> bool:
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == "=":
        return a == b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparator {op!r}")


# -- header -------------------------------------------------------------------


@dataclass(frozen=True)
class VersionSelector:
    kind: str  # "first" | "last" | "filter"
    op: Optional[str] = None
    rhs: Optional[Arith] = None
    pos: Position = _pos()

    @classmethod
    def first(cls) -> "VersionSelector":
        return cls("first")

    @classmethod
    def last(cls) -> "VersionSelector":
        return cls("last")

    @classmethod
    def filter(cls, op: str, rhs: Arith) -> "VersionSelector":
        return cls("filter", op, rhs)


# -- attribute expressions ------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Position = _pos()


@dataclass(frozen=True)
class StringRegex:
    pattern: str
    pos: Position = _pos()


@dataclass(frozen=True)
class IntCompare:
    op: str
    rhs: Arith
    pos: Position = _pos()


@dataclass(frozen=True)
class FloatCompare:
    op: str
    rhs: Arith
    pos: Position = _pos()


@dataclass(frozen=True)
class DateCompare:
    op: str
    value: datetime
    pos: Position = _pos()


@dataclass(frozen=True)
class EnumLit:
    literal: str
    pos: Position = _pos()


AttrExpr = Union[BoolLit, StringRegex, IntCompare, FloatCompare, DateCompare, EnumLit]


# -- restrictions -----------------------------------------------------------------


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "EXISTS" | "FOR_ALL" | "COUNT" | "RANGE"
    low: Optional[int] = None
    high: Optional[int] = None
    pos: Position = _pos()


@dataclass(frozen=True)
class AttrRestriction:
    name: str
    expr: AttrExpr
    pos: Position = _pos()


@dataclass(frozen=True)
class RefRestriction:
    quantifier: Optional[Quantifier]
    relation: str
    template: str
    pos: Position = _pos()
    template_pos: Position = _pos()


@dataclass(frozen=True)
class Member:
    negated: bool
    body: Union[AttrRestriction, RefRestriction]
    pos: Position = _pos()


@dataclass(frozen=True)
class Conjunction:
    members: tuple[Member, ...]
    pos: Position = _pos()


@dataclass(frozen=True)
class Disjunction:
    conjunctions: tuple[Conjunction, ...]
    pos: Position = _pos()


# -- body and output --------------------------------------------------------------


@dataclass(frozen=True)
class TemplateAst:
    type_name: str
    identifier: str
    restrictions: Optional[Disjunction] = None
    escaped: bool = field(default=False, compare=False)
    pos: Position = _pos()
    type_pos: Position = _pos()


@dataclass(frozen=True)
class OrderKey:
    attribute: str
    descending: bool = False
    pos: Position = _pos()


@dataclass(frozen=True)
class OutputAst:
    template: str
    order_by: tuple[OrderKey, ...] = ()
    projection: Optional[tuple[str, ...]] = None
    pos: Position = _pos()
    projection_pos: tuple[Position, ...] = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class QueryAst:
    model_path: str
    version: VersionSelector
    templates: tuple[TemplateAst, ...]
    outputs: tuple[OutputAst, ...]
    pos: Position = _pos()

    def template(self, identifier: str) -> TemplateAst | None:
        for t in self.templates:
            if t.identifier == identifier:
                return t
        return None
