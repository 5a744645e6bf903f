"""Context-sensitive completion for partially typed queries.

The completer reruns the parser on the text before the cursor and reads the
set of token labels it would have accepted at end of input.  Word labels are
then expanded against the schema and the templates declared so far, so every
proposal is a token the grammar accepts at that position.
"""

from __future__ import annotations

import re

from aiql.errors import QuerySyntaxError, SchemaError
from aiql.lexer import KEYWORDS, tokenize
from aiql.metamodel import (
    ENUM_LITERAL_RE, Schema, all_attributes, find_attribute, is_subtype, relation_names,
    resolve_relation,
)
from aiql.parser import Parser

_PARTIAL = re.compile(r"\^?[A-Za-z_][A-Za-z0-9_]*\Z")


def split_partial(text: str) -> tuple[str, str]:
    """Split ``text`` into (prefix, word being typed at the end)."""
    m = _PARTIAL.search(text)
    if m is None or (m.start() > 0 and text[m.start() - 1].isdigit()):
        return text, ""
    return text[:m.start()], m.group(0)


def declared_templates(text: str) -> dict[str, str]:
    """Template id -> listed type for every ``LIST Type id`` in ``text`` (best effort)."""
    try:
        toks = tokenize(text)
    except QuerySyntaxError as exc:
        toks = tokenize(text[:exc.pos.offset]) if exc.pos.offset < len(text) else []
    out: dict[str, str] = {}
    for a, b, c in zip(toks, toks[1:], toks[2:]):
        if a.kind == "KW" and a.value == "LIST" and b.kind == "IDENT" and c.kind == "IDENT":
            out.setdefault(c.value, b.value)
    return out


def _expected(prefix: str):
    """Return (labels, parser context) at end of ``prefix``; None if it already has an error."""
    try:
        parser = Parser(prefix)
    except QuerySyntaxError:
        return None
    try:
        parser.query()
    except QuerySyntaxError as exc:
        if parser.tok.kind != "EOF" or not exc.expected:
            return None
        return exc.expected, parser.ctx
    return frozenset(parser._tried), parser.ctx


def _escape(name: str, in_value_slot: bool = False) -> str:
    if name in KEYWORDS or (in_value_slot and ENUM_LITERAL_RE.match(name)):
        return "^" + name
    return name


class Completer:
    def __init__(self, schema: Schema):
        self.schema = schema

    def _class(self, name):
        return name if isinstance(name, str) and self.schema.has_class(name) else None

    def _templates_for(self, ctx, templates, in_value_slot):
        """Templates that may follow the relation named in ``ctx``."""
        cls = self._class(ctx.get("template_type"))
        target = None
        if cls is not None:
            try:
                target = resolve_relation(self.schema, cls, ctx.get("member_name")).target
            except SchemaError:
                return []
        out = []
        for tid, ttype in templates.items():
            if tid == ctx.get("template_id") or not self.schema.has_class(ttype):
                continue
            if target is None or is_subtype(self.schema, ttype, target):
                out.append(_escape(tid, in_value_slot))
        return out

    def _value_words(self, ctx, templates) -> list[str]:
        cls = self._class(ctx.get("template_type"))
        name = ctx.get("member_name")
        if cls is None:
            return []
        adef = find_attribute(self.schema, cls, name)
        if adef is not None:
            if adef.type == "Enum":
                return list(adef.literals)
            if adef.type == "Boolean":
                return ["true", "false"]
            return []
        if name in relation_names(self.schema, cls) and not resolve_relation(self.schema, cls, name).many:
            return self._templates_for(ctx, templates, in_value_slot=True)
        return []

    def candidates(self, text: str) -> list[str]:
        prefix, _ = split_partial(text)
        found = _expected(prefix)
        if found is None:
            return []
        labels, ctx = found
        templates = declared_templates(text)
        words: list[str] = []
        if "enum literal" in labels:
            words += self._value_words(ctx, templates)
        else:
            words += [w for w in labels if w in KEYWORDS]
            cls = self._class(ctx.get("template_type"))
            if "type name" in labels:
                words += [_escape(c) for c in self.schema.class_names]
            if "member name" in labels and cls is not None:
                words += [_escape(a.name) for a in all_attributes(self.schema, cls)]
                words += [_escape(r) for r in relation_names(self.schema, cls)]
            if "reference name" in labels and cls is not None:
                words += [_escape(r) for r in relation_names(self.schema, cls)
                          if resolve_relation(self.schema, cls, r).many]
            if "template identifier" in labels:
                if "member_name" not in ctx:  # OUTPUT directive
                    words += [_escape(t) for t in templates]
                else:
                    words += self._templates_for(ctx, templates, in_value_slot=False)
            if "attribute name" in labels:
                ttype = self._class(templates.get(ctx.get("output_template")))
                listed = set(ctx.get("listed", ()))
                if ttype is not None:
                    words += [_escape(a.name) for a in all_attributes(self.schema, ttype)
                              if a.name not in listed]
        return sorted(set(words))

    def complete(self, text: str) -> list[str]:
        """Proposals for the word ending at the end of ``text``."""
        _, partial = split_partial(text)
        words = self.candidates(text)
        if partial.startswith("^"):
            # escaped word: only names qualify, all shown escaped
            names = {w.lstrip("^") for w in words if w not in KEYWORDS}
            return sorted("^" + n for n in names if n.startswith(partial[1:]))
        return [w for w in words if w.startswith(partial)]


def complete(text: str, schema: Schema) -> list[str]:
    return Completer(schema).complete(text)
