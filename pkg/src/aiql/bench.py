"""Synthetic structural models and the query scalability harness."""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from aiql.evaluator import evaluate
from aiql.metamodel import Schema, all_attributes, default_schema
from aiql.modelstore import VersionedModel, model_from_dict
from aiql.parser import parse_query
from aiql.serializer import serialize
from aiql.validator import validate_query

_WORDS = ("Request", "Session", "Config", "Order", "Payment", "User", "Cache", "Event",
          "Message", "Token", "Report", "Stream", "Json", "Parser", "Buffer", "Index")
_SUFFIXES = ("Service", "Util", "Model", "Factory", "Impl", "Reader", "Writer", "Manager")

DEFAULT_SIZES = (1_000, 10_000, 50_000)


@dataclass(frozen=True)
class SynthParams:
    component_count: int  # SUBSYSTEM components
    class_count: int
    edge_count: int
    handler_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if min(self.component_count, self.class_count, self.edge_count) < 0:
            raise ValueError("counts must be non-negative")
        if not 0.0 <= self.handler_fraction <= 1.0:
            raise ValueError("handler_fraction must lie in [0, 1]")

    @classmethod
    def for_size(cls, total: int, seed: int = 0, handler_fraction: float = 0.1) -> "SynthParams":
        """Parameters whose generated model has exactly ``total`` elements (total >= 3)."""
        if total < 3:
            raise ValueError("size must be at least 3 elements")
        components = (total - 1) // 2
        subsystems = max(1, components // 25)
        return cls(subsystems, components - subsystems, total - 1 - components, handler_fraction, seed)


def generate_model(p: SynthParams, schema: Schema | None = None) -> VersionedModel:
    schema = schema or default_schema()
    rng = random.Random(p.seed)
    blank_tc = {a.name: None for a in all_attributes(schema, "TechnicalComponent")}
    blank_edge = {a.name: None for a in all_attributes(schema, "ComponentEdge")}
    blank_sys = {a.name: None for a in all_attributes(schema, "SoftwareSystem")}

    elements: list[dict] = []
    out_edges: dict[str, list[str]] = {"system": []}
    sys_attrs = dict(blank_sys, Name=f"synthetic-{p.seed}")
    system = {"id": "system", "class": "SoftwareSystem", "attributes": sys_attrs, "references": {}}
    elements.append(system)

    subsystems, parents = [], []
    for i in range(p.component_count):
        sid = f"sub{i:06d}"
        attrs = dict(blank_tc, Name=f"subsystem{i}", Type="SUBSYSTEM", Version=f"{rng.randint(1, 4)}.0")
        elements.append({"id": sid, "class": "TechnicalComponent", "attributes": attrs, "references": {}})
        parents.append(rng.choice(["system"] + subsystems))
        subsystems.append(sid)
        out_edges[sid] = []

    handlers = set(rng.sample(range(p.class_count), round(p.handler_fraction * p.class_count)))
    classes = []
    for i in range(p.class_count):
        cid = f"cls{i:06d}"
        suffix = "Handler" if i in handlers else rng.choice(_SUFFIXES)
        attrs = dict(blank_tc, Name=f"{rng.choice(_WORDS)}{i}{suffix}", Type="CLASS",
                     Version=f"{rng.randint(1, 4)}.{rng.randint(0, 9)}")
        elements.append({"id": cid, "class": "TechnicalComponent", "attributes": attrs, "references": {}})
        parents.append(rng.choice(subsystems) if subsystems else "system")
        classes.append(cid)
        out_edges[cid] = []

    children = subsystems + classes
    edge_no = 0

    def add_edge(parent, child, kind):
        nonlocal edge_no
        eid = f"edge{edge_no:07d}"
        edge_no += 1
        attrs = dict(blank_edge)
        if "Kind" in attrs:
            attrs["Kind"] = kind
        elements.append({"id": eid, "class": "ComponentEdge", "attributes": attrs,
                         "references": {"Parent": [parent], "Child": [child]}})
        out_edges[parent].append(eid)

    for child, parent in list(zip(children, parents))[:p.edge_count]:
        add_edge(parent, child, "CONTAINMENT")
    pool = classes or subsystems
    if edge_no < p.edge_count and not pool:
        raise ValueError("dependency edges need at least one component")
    while edge_no < p.edge_count:
        src, dst = rng.choice(pool), rng.choice(pool)
        add_edge(src, dst, "DEPENDENCY")

    for el in elements:
        if el["class"] != "ComponentEdge":
            el["references"]["ComponentEdge"] = out_edges[el["id"]]
    doc = {"name": f"synthetic-{p.seed}", "versions": [{"index": 1, "elements": elements}]}
    return model_from_dict(doc, schema)


def bundled_queries() -> list[tuple[str, str]]:
    root = resources.files("aiql.queries")
    return [(f"q{i}", root.joinpath(f"q{i}.aiql").read_text("utf-8")) for i in range(1, 8)]


def load_query_dir(path: Path) -> list[tuple[str, str]]:
    files = sorted(Path(path).glob("*.aiql"))
    return [(f.stem, f.read_text("utf-8")) for f in files]


@dataclass
class BenchRow:
    system: str
    elements: int
    query: str
    templates: int
    outputs: int
    matched: int
    execution_ms: float
    marshaling_ms: float
    payload_sha256: str


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    repetitions: int = 1

    def row(self, system: str, query: str) -> BenchRow:
        return next(r for r in self.rows if r.system == system and r.query == query)

    def payloads(self) -> list[tuple[str, str, str]]:
        return [(r.system, r.query, r.payload_sha256) for r in self.rows]

    def to_json(self) -> str:
        return json.dumps({"repetitions": self.repetitions, "rows": [asdict(r) for r in self.rows]}, indent=2) + "\n"

    def table(self) -> str:
        head = ("system", "elements", "query", "tmpl", "out", "matched", "exec ms", "marshal ms")
        lines = [head] + [(r.system, str(r.elements), r.query, str(r.templates), str(r.outputs),
                           str(r.matched), f"{r.execution_ms:.1f}", f"{r.marshaling_ms:.1f}")
                          for r in self.rows]
        widths = [max(len(line[i]) for line in lines) for i in range(len(head))]
        out = []
        for n, line in enumerate(lines):
            out.append("  ".join(c.ljust(w) if i < 3 else c.rjust(w) for i, (c, w) in enumerate(zip(line, widths))))
            if n == 0:
                out.append("  ".join("-" * w for w in widths))
        return "\n".join(out) + "\n"


def time_query(text: str, model: VersionedModel, schema: Schema, compact: bool = False):
    """Run one query; return (execution seconds, marshaling seconds, payload, validated, result)."""
    t0 = time.perf_counter()
    validated = validate_query(parse_query(text), schema)
    result = evaluate(validated, model, schema)
    t1 = time.perf_counter()
    payload = serialize(result, validated, schema, compact=compact)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, payload, validated, result


def run_benchmark(models, queries, repetitions: int, schema: Schema, compact: bool = False) -> BenchReport:
    """Time every (model, query) pair after one untimed warm-up run.

    ``models`` is a list of ``(label, VersionedModel)``; ``queries`` a list of
    ``(name, text)``.  Timings are means over ``repetitions`` runs.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    for _, text in queries:
        validate_query(parse_query(text), schema)
    report = BenchReport(repetitions=repetitions)
    for label, model in models:
        size = sum(len(v.elements) for v in model.versions)
        for name, text in queries:
            _, _, payload, validated, result = time_query(text, model, schema, compact)
            exec_total = marshal_total = 0.0
            for _ in range(repetitions):
                e, m, again, _, _ = time_query(text, model, schema, compact)
                exec_total += e
                marshal_total += m
                if again != payload:
                    raise AssertionError(f"non-deterministic payload for {label}/{name}")
            matched = sum(len(ms.sets[o.template]) for ms in result.per_version for o in validated.ast.outputs)
            report.rows.append(BenchRow(
                system=label, elements=size, query=name,
                templates=len(validated.ast.templates), outputs=len(validated.ast.outputs), matched=matched,
                execution_ms=1000 * exec_total / repetitions, marshaling_ms=1000 * marshal_total / repetitions,
                payload_sha256=hashlib.sha256(payload.encode("utf-8")).hexdigest(),
            ))
    return report
