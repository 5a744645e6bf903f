"""Architecture meta-model: classes, typed attributes, references and shortcuts.

A schema is loaded from a JSON document and is immutable afterwards.  The
query validator, the model store and the evaluator all resolve names through
the helpers in this module, so inherited members and shortcuts are handled
in exactly one place.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Union

from aiql.errors import SchemaError

ATTR_TYPES = ("Boolean", "String", "Int", "Float", "Date", "Enum")
UPPER_BOUNDS = ("one", "many")

ENUM_LITERAL_RE = re.compile(r"[A-Z][A-Z0-9_]*\Z")
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class AttrDef:
    name: str
    type: str
    literals: tuple[str, ...] = ()


@dataclass(frozen=True)
class RefDef:
    name: str
    target: str
    upper_bound: str = "many"

    @property
    def many(self) -> bool:
        return self.upper_bound == "many"


@dataclass(frozen=True)
class ShortcutDef:
    name: str
    source: str
    path: tuple[str, ...]
    target: str
    upper_bound: str

    @property
    def many(self) -> bool:
        return self.upper_bound == "many"


Relation = Union[RefDef, ShortcutDef]


@dataclass(frozen=True)
class ClassDef:
    name: str
    supertype: str | None = None
    abstract: bool = False
    attributes: tuple[AttrDef, ...] = ()
    references: tuple[RefDef, ...] = ()


@dataclass(frozen=True)
class Schema:
    classes: tuple[ClassDef, ...] = ()
    shortcuts: tuple[ShortcutDef, ...] = ()
    _by_name: dict = field(default_factory=dict, compare=False, repr=False)
    _attrs: dict = field(default_factory=dict, compare=False, repr=False)
    _refs: dict = field(default_factory=dict, compare=False, repr=False)
    _ancestors: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        # Flattened views are computed once; callers must only pass validated input.
        by_name = {c.name: c for c in self.classes}
        self._by_name.update(by_name)
        for c in self.classes:
            chain = []
            cur: str | None = c.name
            while cur is not None and cur not in chain:
                chain.append(cur)
                cur = by_name[cur].supertype if cur in by_name else None
            self._ancestors[c.name] = tuple(chain)
            attrs: list[AttrDef] = []
            refs: list[RefDef] = []
            for anc in reversed(chain):
                if anc in by_name:
                    attrs.extend(by_name[anc].attributes)
                    refs.extend(by_name[anc].references)
            self._attrs[c.name] = tuple(attrs)
            self._refs[c.name] = tuple(refs)

    @property
    def class_names(self) -> list[str]:
        return [c.name for c in self.classes]

    def get_class(self, name: str) -> ClassDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown class {name!r}") from None

    def has_class(self, name: str) -> bool:
        return name in self._by_name

    def ancestors(self, name: str) -> tuple[str, ...]:
        """The class itself followed by its supertypes, nearest first."""
        self.get_class(name)
        return self._ancestors[name]

    def subtypes(self, name: str) -> list[str]:
        self.get_class(name)
        return [c.name for c in self.classes if name in self._ancestors[c.name]]


def all_attributes(schema: Schema, class_name: str) -> list[AttrDef]:
    schema.get_class(class_name)
    return list(schema._attrs[class_name])


def all_references(schema: Schema, class_name: str) -> list[RefDef]:
    schema.get_class(class_name)
    return list(schema._refs[class_name])


def find_attribute(schema: Schema, class_name: str, name: str) -> AttrDef | None:
    for a in schema._attrs[class_name]:
        if a.name == name:
            return a
    return None


def is_subtype(schema: Schema, sub: str, sup: str) -> bool:
    schema.get_class(sup)
    return sup in schema.ancestors(sub)


def shortcuts_for(schema: Schema, class_name: str) -> list[ShortcutDef]:
    ancestors = schema.ancestors(class_name)
    return [s for s in schema.shortcuts if s.source in ancestors]


def resolve_relation(schema: Schema, class_name: str, name: str) -> Relation:
    for r in schema._refs[schema.get_class(class_name).name]:
        if r.name == name:
            return r
    for s in shortcuts_for(schema, class_name):
        if s.name == name:
            return s
    raise SchemaError(f"class {class_name!r} has no reference or shortcut named {name!r}")


def relation_names(schema: Schema, class_name: str) -> list[str]:
    names = [r.name for r in all_references(schema, class_name)]
    names += [s.name for s in shortcuts_for(schema, class_name)]
    return names


# -- loading -----------------------------------------------------------------


def load_schema(text: str) -> Schema:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema syntax error at {exc.lineno}:{exc.colno}: {exc.msg}") from None
    return schema_from_dict(doc)


def default_schema_text() -> str:
    return resources.files("aiql.data").joinpath("structural.schema.json").read_text("utf-8")


def default_schema() -> Schema:
    return load_schema(default_schema_text())


def _require(obj, key, kind, where, problems):
    if not isinstance(obj, dict) or key not in obj:
        problems.append(f"{where}: missing {key!r}")
        return None
    val = obj[key]
    if not isinstance(val, kind):
        problems.append(f"{where}: {key!r} must be {kind.__name__ if isinstance(kind, type) else 'valid'}")
        return None
    return val


def schema_from_dict(doc) -> Schema:
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise SchemaError("schema document must be a JSON object")
    raw_classes = doc.get("classes", [])
    raw_shortcuts = doc.get("shortcuts", [])
    if not isinstance(raw_classes, list) or not isinstance(raw_shortcuts, list):
        raise SchemaError("'classes' and 'shortcuts' must be arrays")

    classes: list[ClassDef] = []
    seen: set[str] = set()
    for i, rc in enumerate(raw_classes):
        where = f"classes[{i}]"
        name = _require(rc, "name", str, where, problems)
        if name is None:
            continue
        where = f"class {name!r}"
        if not NAME_RE.match(name):
            problems.append(f"{where}: invalid class name")
        if name in seen:
            problems.append(f"{where}: duplicate class name")
        seen.add(name)
        supertype = rc.get("supertype")
        if supertype is not None and not isinstance(supertype, str):
            problems.append(f"{where}: supertype must be a string")
            supertype = None
        attrs = []
        for j, ra in enumerate(rc.get("attributes", [])):
            aname = _require(ra, "name", str, f"{where} attribute[{j}]", problems)
            atype = _require(ra, "type", str, f"{where} attribute[{j}]", problems)
            if aname is None or atype is None:
                continue
            if not NAME_RE.match(aname):
                problems.append(f"{where}.{aname}: invalid attribute name")
            elif aname == "type":
                problems.append(f"{where}: attribute name 'type' is reserved for result objects")
            if atype not in ATTR_TYPES:
                problems.append(f"{where}.{aname}: unknown attribute type {atype!r}")
                continue
            literals = tuple(ra.get("literals", ()))
            if atype == "Enum":
                if not literals:
                    problems.append(f"{where}.{aname}: enum literal set must be non-empty")
                for lit in literals:
                    if not isinstance(lit, str) or not ENUM_LITERAL_RE.match(lit):
                        problems.append(f"{where}.{aname}: enum literal {lit!r} must be an uppercase identifier")
                if len(set(literals)) != len(literals):
                    problems.append(f"{where}.{aname}: duplicate enum literal")
            elif literals:
                problems.append(f"{where}.{aname}: literals are only allowed on Enum attributes")
            attrs.append(AttrDef(aname, atype, literals))
        refs = []
        for j, rr in enumerate(rc.get("references", [])):
            rname = _require(rr, "name", str, f"{where} reference[{j}]", problems)
            target = _require(rr, "target", str, f"{where} reference[{j}]", problems)
            bound = rr.get("upperBound", "many") if isinstance(rr, dict) else "many"
            if rname is None or target is None:
                continue
            if not NAME_RE.match(rname):
                problems.append(f"{where}.{rname}: invalid reference name")
            elif rname == "type":
                problems.append(f"{where}: reference name 'type' is reserved for result objects")
            if bound not in UPPER_BOUNDS:
                problems.append(f"{where}.{rname}: upperBound must be 'one' or 'many'")
                continue
            refs.append(RefDef(rname, target, bound))
        classes.append(ClassDef(name, supertype, bool(rc.get("abstract", False)), tuple(attrs), tuple(refs)))

    by_name = {c.name: c for c in classes}
    for c in classes:
        if c.supertype is not None and c.supertype not in by_name:
            problems.append(f"class {c.name!r}: unknown supertype {c.supertype!r}")
        for r in c.references:
            if r.target not in by_name:
                problems.append(f"class {c.name!r}: reference {r.name!r} targets unknown class {r.target!r}")
    for c in classes:
        cur, visited = c.name, []
        while cur is not None and cur in by_name:
            if cur in visited:
                problems.append(f"inheritance cycle through {c.name!r}")
                break
            visited.append(cur)
            cur = by_name[cur].supertype
    if problems:
        raise SchemaError("invalid schema", problems)

    partial = Schema(tuple(classes))
    for c in classes:
        names = [a.name for a in partial._attrs[c.name]] + [r.name for r in partial._refs[c.name]]
        dupes = sorted({n for n in names if names.count(n) > 1})
        for n in dupes:
            problems.append(f"class {c.name!r}: member {n!r} declared more than once (inherited members included)")

    shortcuts: list[ShortcutDef] = []
    for i, rs in enumerate(raw_shortcuts):
        where = f"shortcuts[{i}]"
        name = _require(rs, "name", str, where, problems)
        source = _require(rs, "source", str, where, problems)
        path = _require(rs, "path", list, where, problems)
        if name is None or source is None or path is None:
            continue
        where = f"shortcut {name!r}"
        if source not in by_name:
            problems.append(f"{where}: unknown source class {source!r}")
            continue
        if not path:
            problems.append(f"{where}: path must be non-empty")
            continue
        cur = source
        many = False
        ok = True
        for step in path:
            ref = next((r for r in partial._refs[cur] if r.name == step), None)
            if ref is None:
                problems.append(f"{where}: step {step!r} is not a reference of class {cur!r}")
                ok = False
                break
            many = many or ref.many
            cur = ref.target
        if ok:
            shortcuts.append(ShortcutDef(name, source, tuple(path), cur, "many" if many else "one"))

    for c in classes:
        members = {a.name for a in partial._attrs[c.name]} | {r.name for r in partial._refs[c.name]}
        applicable = [s for s in shortcuts if s.source in partial._ancestors[c.name]]
        seen_sc: set[str] = set()
        for s in applicable:
            if s.name in members:
                problems.append(f"shortcut {s.name!r} collides with a member of class {c.name!r} "
                                "(shortcut and reference names must be disjoint)")
            if s.name in seen_sc:
                problems.append(f"shortcut {s.name!r} is defined more than once for class {c.name!r}")
            seen_sc.add(s.name)
    if problems:
        # dedupe while keeping order; subclasses repeat their parent's collision
        raise SchemaError("invalid schema", list(dict.fromkeys(problems)))
    return Schema(tuple(classes), tuple(shortcuts))


def schema_to_dict(schema: Schema) -> dict:
    classes = []
    for c in schema.classes:
        d: dict = {"name": c.name}
        if c.supertype:
            d["supertype"] = c.supertype
        if c.abstract:
            d["abstract"] = True
        d["attributes"] = []
        for a in c.attributes:
            ad = {"name": a.name, "type": a.type}
            if a.literals:
                ad["literals"] = list(a.literals)
            d["attributes"].append(ad)
        d["references"] = [{"name": r.name, "target": r.target, "upperBound": r.upper_bound}
                           for r in c.references]
        classes.append(d)
    shortcuts = [{"name": s.name, "source": s.source, "path": list(s.path)} for s in schema.shortcuts]
    return {"classes": classes, "shortcuts": shortcuts}
