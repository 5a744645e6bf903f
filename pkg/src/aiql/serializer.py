"""Marshal query results into JSON documents.

Single-version results render as an array with one inner array per OUTPUT
directive.  Selecting several versions wraps each of those in
``{"version": i, "results": [...]}``.  Each element is an object whose first
key is ``"type"`` (the class name), followed by attributes in schema order
and references as arrays of target ids.
"""

from __future__ import annotations

import json
from datetime import datetime
from json.encoder import encode_basestring

from aiql.ast import OrderKey
from aiql.evaluator import MatchSets, QueryResult
from aiql.metamodel import Schema, all_attributes, all_references
from aiql.validator import ValidatedQuery


def sort_elements(elements, order_by: tuple[OrderKey, ...] | list[OrderKey] = ()) -> list:
    """Order by the given keys, ties broken by ascending element id.

    Nulls sort first under ASC and last under DESC.
    """
    out = sorted(elements, key=lambda e: e.id)
    for key in reversed(order_by):
        name = key.attribute
        out.sort(key=lambda e: (e.attributes.get(name) is not None, _sortable(e.attributes.get(name))),
                 reverse=key.descending)
    return out


def _sortable(value):
    return 0 if value is None else value


def _json_value(value):
    if isinstance(value, datetime):
        return value.strftime("%Y-%m-%dT%H:%M:%S")
    return value


class _Layout:
    """Per-class key order, computed once per serialization."""

    def __init__(self, schema: Schema):
        self.schema = schema
        self.cache: dict[str, tuple[list[str], list[str]]] = {}

    def keys(self, class_name: str):
        hit = self.cache.get(class_name)
        if hit is None:
            hit = ([a.name for a in all_attributes(self.schema, class_name)],
                   [r.name for r in all_references(self.schema, class_name)])
            self.cache[class_name] = hit
        return hit


def element_object(element, layout: _Layout, projection=None) -> dict:
    obj = {"type": element.class_name}
    attrs = element.attributes
    if projection is not None:
        for name in projection:
            obj[name] = _json_value(attrs.get(name))
        return obj
    attr_names, ref_names = layout.keys(element.class_name)
    for name in attr_names:
        obj[name] = _json_value(attrs.get(name))
    refs = element.references
    for name in ref_names:
        obj[name] = list(refs.get(name, ()))
    return obj


def _version_payload(ms: MatchSets, q: ValidatedQuery, layout: _Layout) -> list:
    payload = []
    for out in q.ast.outputs:
        elements = ms.sets[out.template]
        if out.order_by:
            elements = sort_elements(elements, out.order_by)
        payload.append([element_object(e, layout, out.projection) for e in elements])
    return payload


def to_document(result: QueryResult, q: ValidatedQuery, schema: Schema):
    layout = _Layout(schema)
    if len(result.per_version) == 1:
        return _version_payload(result.per_version[0], q, layout)
    return [{"version": ms.version, "results": _version_payload(ms, q, layout)}
            for ms in result.per_version]


def _scalar(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if value.__class__ is int:
        return int.__repr__(value)
    return json.dumps(value)


def _pretty(value, pad: str, enc=encode_basestring) -> str:
    # same bytes as json.dumps(indent=2, ensure_ascii=False), which falls back
    # to the pure-Python encoder whenever indent is set and is about 2x slower
    cls = value.__class__
    if cls is str:
        return enc(value)
    if cls is list:
        if not value:
            return "[]"
        inner = pad + "  "
        items = [enc(x) if x.__class__ is str else _pretty(x, inner) for x in value]
        return "[" + inner + ("," + inner).join(items) + pad + "]"
    if cls is dict:
        if not value:
            return "{}"
        inner = pad + "  "
        items = [enc(k) + ": " + (enc(x) if x.__class__ is str else _pretty(x, inner)) for k, x in value.items()]
        return "{" + inner + ("," + inner).join(items) + pad + "}"
    return _scalar(value)


def render(doc, compact: bool = False) -> str:
    if compact:
        return json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"
    return _pretty(doc, "\n") + "\n"


def serialize(result: QueryResult, q: ValidatedQuery, schema: Schema, compact: bool = False) -> str:
    return render(to_document(result, q, schema), compact)
