"""Build a structural model from a source tree.

The root directory becomes the SoftwareSystem, every sub-directory a
SUBSYSTEM component and every included file a CLASS component.
Containment is recorded as ComponentEdges.  Optionally, import/include
lines found in files add DEPENDENCY edges between the files they connect.
"""

from __future__ import annotations

import fnmatch
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

from aiql.errors import AiqlError
from aiql.metamodel import Schema, all_attributes
from aiql.modelstore import VersionedModel, model_from_dict

log = logging.getLogger(__name__)

DEFAULT_EXCLUDES = (".*", "__pycache__", "node_modules", "*.pyc", "*.class", "*.o")

IMPORT_PATTERNS = (
    r"^\s*from\s+([\w.]+)\s+import\b",
    r"^\s*import\s+([\w.]+)\s*;?\s*$",
    r"^\s*import\s+static\s+([\w.]+)\s*;",
    r"^\s*#\s*include\s*[<\"]([^>\"]+)[>\"]",
    r"\bfrom\s+['\"]([^'\"]+)['\"]",
    r"\brequire\s*\(\s*['\"]([^'\"]+)['\"]\s*\)",
    r"^\s*use\s+(?:crate::)?([\w:]+)",
)


class IngestError(AiqlError):
    pass


@dataclass
class IngestConfig:
    root: Path
    include_globs: list[str] = field(default_factory=lambda: ["*"])
    exclude_globs: list[str] = field(default_factory=lambda: list(DEFAULT_EXCLUDES))
    system_name: str | None = None
    edge_mode: str = "containmentOnly"  # or "containmentPlusImports"
    import_patterns: list[str] = field(default_factory=lambda: list(IMPORT_PATTERNS))


def _matches(rel: str, globs) -> bool:
    name = rel.rsplit("/", 1)[-1]
    return any(fnmatch.fnmatchcase(name, g) or fnmatch.fnmatchcase(rel, g) for g in globs)


def _walk(cfg: IngestConfig):
    """Yield sorted relative directory and file paths (posix style)."""
    dirs, files = [], []
    root = cfg.root
    for current, subdirs, names in os.walk(root, onerror=_raise):
        rel_dir = Path(current).relative_to(root).as_posix()
        rel_dir = "" if rel_dir == "." else rel_dir
        keep = []
        for d in sorted(subdirs):
            rel = f"{rel_dir}/{d}" if rel_dir else d
            if not _matches(rel, cfg.exclude_globs):
                keep.append(d)
                dirs.append(rel)
        subdirs[:] = keep
        for n in sorted(names):
            rel = f"{rel_dir}/{n}" if rel_dir else n
            if _matches(rel, cfg.exclude_globs) or not _matches(rel, cfg.include_globs):
                continue
            files.append(rel)
    return sorted(dirs), sorted(files)


def _raise(exc):
    raise IngestError(f"cannot read {exc.filename}: {exc.strerror}")


def _parent_id(rel: str) -> str:
    parent = rel.rsplit("/", 1)[0] if "/" in rel else ""
    return f"dir:{parent}" if parent else "system"


class _Resolver:
    def __init__(self, files: list[str]):
        self.exact = {f: f for f in files}
        self.no_ext: dict[str, list[str]] = {}
        self.stems: dict[str, list[str]] = {}
        for f in files:
            p = PurePosixPath(f)
            self.no_ext.setdefault(str(p.with_suffix("")), []).append(f)
            self.stems.setdefault(p.stem, []).append(f)

    def resolve(self, name: str) -> str | None:
        """Map an imported name to exactly one file, or None if ambiguous or external."""
        name = name.strip()
        while name.startswith("./"):
            name = name[2:]
        if name in self.exact:
            return name
        keys = [name] if "/" in name else [name, re.sub(r"::|\.", "/", name)]
        for key in keys:
            hits = self.no_ext.get(key) or [f for k, fs in self.no_ext.items()
                                            if k.endswith("/" + key) for f in fs]
            if len(hits) == 1:
                return hits[0]
        stem = PurePosixPath(name).stem if "/" in name else re.split(r"::|\.", name)[-1]
        hits = self.stems.get(stem, [])
        return hits[0] if len(hits) == 1 else None


def scan_tree(cfg: IngestConfig, schema: Schema) -> VersionedModel:
    root = Path(cfg.root)
    if not root.is_dir():
        raise IngestError(f"cannot read root directory {str(root)!r}")
    if cfg.edge_mode not in ("containmentOnly", "containmentPlusImports"):
        raise IngestError(f"unknown edge mode {cfg.edge_mode!r}")
    for g in list(cfg.include_globs) + list(cfg.exclude_globs):
        if not isinstance(g, str) or not g:
            raise IngestError(f"malformed glob {g!r}")
    cfg = IngestConfig(root, list(cfg.include_globs), list(cfg.exclude_globs), cfg.system_name,
                       cfg.edge_mode, list(cfg.import_patterns))
    dirs, files = _walk(cfg)
    if not files and cfg.include_globs:
        log.warning("include globs %s matched no files under %s", cfg.include_globs, root)

    def blank(cls):
        return {a.name: None for a in all_attributes(schema, cls)}

    elements: dict[str, dict] = {}
    out_edges: dict[str, list[str]] = {}

    def add(el):
        if el["id"] in elements:
            raise IngestError(f"element id collision: {el['id']!r}")
        elements[el["id"]] = el

    system_attrs = blank("SoftwareSystem")
    system_attrs["Name"] = cfg.system_name or root.resolve().name
    add({"id": "system", "class": "SoftwareSystem", "attributes": system_attrs, "references": {}})
    for rel in dirs:
        attrs = blank("TechnicalComponent")
        attrs.update(Name=rel.rsplit("/", 1)[-1], Type="SUBSYSTEM")
        add({"id": f"dir:{rel}", "class": "TechnicalComponent", "attributes": attrs, "references": {}})
    for rel in files:
        attrs = blank("TechnicalComponent")
        attrs.update(Name=PurePosixPath(rel).stem, Type="CLASS")
        add({"id": f"file:{rel}", "class": "TechnicalComponent", "attributes": attrs, "references": {}})

    def edge(eid, parent, child, kind):
        attrs = blank("ComponentEdge")
        if "Kind" in attrs:
            attrs["Kind"] = kind
        add({"id": eid, "class": "ComponentEdge", "attributes": attrs,
             "references": {"Parent": [parent], "Child": [child]}})
        out_edges.setdefault(parent, []).append(eid)

    for rel in dirs:
        edge(f"contains:dir:{rel}", _parent_id(rel), f"dir:{rel}", "CONTAINMENT")
    for rel in files:
        edge(f"contains:file:{rel}", _parent_id(rel), f"file:{rel}", "CONTAINMENT")

    if cfg.edge_mode == "containmentPlusImports":
        patterns = [re.compile(p, re.MULTILINE) for p in cfg.import_patterns]
        resolver = _Resolver(files)
        for rel in files:
            try:
                text = (root / rel).read_text("utf-8", errors="replace")
            except OSError as exc:
                raise IngestError(f"cannot read {rel}: {exc.strerror}") from None
            targets = set()
            for pat in patterns:
                for m in pat.finditer(text):
                    hit = resolver.resolve(m.group(1))
                    if hit is not None and hit != rel:
                        targets.add(hit)
            for dst in sorted(targets):
                edge(f"uses:file:{rel}->file:{dst}", f"file:{rel}", f"file:{dst}", "DEPENDENCY")

    for eid, el in elements.items():
        if el["class"] != "ComponentEdge":
            el["references"]["ComponentEdge"] = sorted(out_edges.get(eid, []))
    doc = {"name": system_attrs["Name"],
           "versions": [{"index": 1, "elements": [elements[k] for k in sorted(elements)]}]}
    return model_from_dict(doc, schema)
