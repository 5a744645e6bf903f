"""Versioned architecture models and VERSION selection."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Mapping

from aiql.ast import VersionSelector, compare, eval_arith
from aiql.errors import EmptySelectionError, ModelError
from aiql.metamodel import Schema, all_attributes, all_references, is_subtype

DATE_FORMAT = "%Y-%m-%dT%H:%M:%S"

__all__ = [
    "ModelElement", "VersionSnapshot", "VersionedModel", "VersionSelector",
    "load_model", "model_from_dict", "model_to_dict", "dump_model",
    "select_versions", "elements_of_type", "parse_date", "format_date",
]


def parse_date(text: str) -> datetime:
    # strptime alone accepts single-digit fields; the format is fixed-width
    if len(text) != 19:
        raise ValueError(f"date {text!r} is not in YYYY-MM-DDThh:mm:ss format")
    return datetime.strptime(text, DATE_FORMAT)


def format_date(value: datetime) -> str:
    return value.strftime(DATE_FORMAT)


@dataclass(frozen=True)
class ModelElement:
    id: str
    class_name: str
    attributes: Mapping[str, Any] = field(default_factory=dict)
    references: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def targets(self, relation: str) -> tuple[str, ...]:
        return self.references.get(relation, ())


@dataclass(frozen=True)
class VersionSnapshot:
    index: int
    elements: Mapping[str, ModelElement] = field(default_factory=dict)
    _by_class: dict = field(default_factory=dict, compare=False, repr=False)
    _extent: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        buckets: dict[str, list[ModelElement]] = {}
        for eid in sorted(self.elements):
            el = self.elements[eid]
            buckets.setdefault(el.class_name, []).append(el)
        self._by_class.update(buckets)

    def get(self, element_id: str) -> ModelElement | None:
        return self.elements.get(element_id)


@dataclass(frozen=True)
class VersionedModel:
    name: str
    versions: tuple[VersionSnapshot, ...]

    def version(self, index: int) -> VersionSnapshot:
        return self.versions[index - 1]

    @property
    def count(self) -> int:
        return len(self.versions)


def elements_of_type(snapshot: VersionSnapshot, class_name: str, schema: Schema) -> list[ModelElement]:
    """All elements of ``class_name`` or a subtype, ordered by id."""
    subs = tuple(schema.subtypes(class_name))
    cached = snapshot._extent.get(subs)
    if cached is None:
        lists = [snapshot._by_class[s] for s in subs if s in snapshot._by_class]
        if len(lists) == 1:
            cached = lists[0]
        else:
            cached = list(heapq.merge(*lists, key=lambda e: e.id))
        snapshot._extent[subs] = cached
    return list(cached)


def select_versions(selector: VersionSelector, count: int) -> list[int]:
    if count < 1:
        raise ValueError("a model has at least one version")
    if selector.kind == "first":
        return [1]
    if selector.kind == "last":
        return [count]
    rhs = eval_arith(selector.rhs)
    picked = [i for i in range(1, count + 1) if compare(selector.op, i, rhs)]
    if not picked:
        raise EmptySelectionError(
            f"VERSION {selector.op} {rhs} selects no version (model has versions 1..{count})")
    return picked


# -- loading and dumping ----------------------------------------------------------


def _check_value(attr, value, where: str, problems: list[str]):
    if value is None:
        return None
    t = attr.type
    if t == "Boolean":
        if isinstance(value, bool):
            return value
    elif t == "String":
        if isinstance(value, str):
            return value
    elif t == "Int":
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif t == "Float":
        if isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value):
            return float(value)
    elif t == "Date":
        if isinstance(value, str):
            try:
                return parse_date(value)
            except ValueError:
                pass
    elif t == "Enum":
        if isinstance(value, str) and value in attr.literals:
            return value
        if isinstance(value, str):
            problems.append(f"{where}: {value!r} is not a literal of enum {attr.name} {list(attr.literals)}")
            return None
    problems.append(f"{where}: attribute type mismatch, expected {t}, got {json.dumps(value)}")
    return None


def load_model(text: str, schema: Schema) -> VersionedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model syntax error at {exc.lineno}:{exc.colno}: {exc.msg}") from None
    return model_from_dict(doc, schema)


def model_from_dict(doc, schema: Schema) -> VersionedModel:
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    raw_versions = doc.get("versions")
    if not isinstance(raw_versions, list):
        raise ModelError("model document needs a 'versions' array")
    if not raw_versions:
        raise ModelError("model must contain at least one version")
    problems: list[str] = []

    indices = []
    for rv in raw_versions:
        idx = rv.get("index") if isinstance(rv, dict) else None
        if not isinstance(idx, int) or isinstance(idx, bool):
            problems.append("every version needs an integer 'index'")
            idx = None
        indices.append(idx)
    if not problems and sorted(indices) != list(range(1, len(indices) + 1)):
        problems.append(f"version indices must be contiguous from 1, got {sorted(indices)}")
    if problems:
        raise ModelError("invalid model", problems)

    snapshots = []
    for idx, rv in sorted(zip(indices, raw_versions), key=lambda p: p[0]):
        snapshots.append(_load_snapshot(idx, rv.get("elements", []), schema, problems))
    if problems:
        raise ModelError("model does not conform to schema", problems)
    return VersionedModel(str(doc.get("name", "")), tuple(snapshots))


def _load_snapshot(index: int, raw_elements, schema: Schema, problems: list[str]) -> VersionSnapshot:
    if not isinstance(raw_elements, list):
        problems.append(f"version {index}: 'elements' must be an array")
        return VersionSnapshot(index, {})
    elements: dict[str, ModelElement] = {}
    pending_refs = []
    for n, raw in enumerate(raw_elements):
        if not isinstance(raw, dict):
            problems.append(f"version {index} element #{n}: must be an object")
            continue
        eid, cname = raw.get("id"), raw.get("class")
        if not isinstance(eid, str) or not eid:
            problems.append(f"version {index} element #{n}: missing id")
            continue
        where = f"version {index} element {eid!r}"
        if eid in elements:
            problems.append(f"{where}: duplicate id")
            continue
        if not isinstance(cname, str) or not schema.has_class(cname):
            problems.append(f"{where}: unknown class {cname!r}")
            continue
        if schema.get_class(cname).abstract:
            problems.append(f"{where}: abstract class {cname!r} cannot be instantiated")
            continue

        raw_attrs = raw.get("attributes", {}) or {}
        attr_defs = {a.name: a for a in all_attributes(schema, cname)}
        attrs = {}
        for key in raw_attrs:
            if key not in attr_defs:
                problems.append(f"{where}: unknown attribute {key!r} for class {cname}")
        for name, adef in attr_defs.items():
            if name not in raw_attrs:
                problems.append(f"{where}: attribute {name!r} is unset (use null for no value)")
                continue
            attrs[name] = _check_value(adef, raw_attrs[name], f"{where}.{name}", problems)

        raw_refs = raw.get("references", {}) or {}
        ref_defs = {r.name: r for r in all_references(schema, cname)}
        refs = {}
        for key, targets in raw_refs.items():
            rdef = ref_defs.get(key)
            if rdef is None:
                problems.append(f"{where}: unknown reference {key!r} for class {cname}")
                continue
            if not isinstance(targets, list) or not all(isinstance(t, str) for t in targets):
                problems.append(f"{where}.{key}: reference targets must be a list of ids")
                continue
            if not rdef.many and len(targets) > 1:
                problems.append(f"{where}.{key}: cardinality violation, upper bound one but {len(targets)} targets")
            if len(set(targets)) != len(targets):
                problems.append(f"{where}.{key}: duplicate target ids")
            refs[key] = tuple(targets)
            pending_refs.append((where, key, rdef, targets))
        for name in ref_defs:
            refs.setdefault(name, ())
        refs = {r: refs[r] for r in ref_defs}
        elements[eid] = ModelElement(eid, cname, attrs, refs)

    for where, key, rdef, targets in pending_refs:
        for t in targets:
            target = elements.get(t)
            if target is None:
                problems.append(f"{where}.{key}: dangling reference to missing id {t!r}")
            elif not is_subtype(schema, target.class_name, rdef.target):
                problems.append(f"{where}.{key}: target {t!r} is a {target.class_name}, expected {rdef.target}")
    return VersionSnapshot(index, elements)


def _dump_value(value):
    if isinstance(value, datetime):
        return format_date(value)
    return value


def model_to_dict(model: VersionedModel) -> dict:
    versions = []
    for snap in model.versions:
        elements = []
        for eid in sorted(snap.elements):
            el = snap.elements[eid]
            elements.append({
                "id": el.id,
                "class": el.class_name,
                "attributes": {k: _dump_value(v) for k, v in el.attributes.items()},
                "references": {k: list(v) for k, v in el.references.items()},
            })
        versions.append({"index": snap.index, "elements": elements})
    return {"name": model.name, "versions": versions}


def dump_model(model: VersionedModel, indent: int | None = 1) -> str:
    return json.dumps(model_to_dict(model), indent=indent, ensure_ascii=False) + "\n"
