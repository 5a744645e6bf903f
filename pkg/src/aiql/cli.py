"""Command-line front end.

Exit codes: 0 success, 1 user error (syntax, validation, empty version
selection, bad arguments), 2 I/O error (unreadable, unwritable or
malformed input files), 3 internal defect.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from dataclasses import asdict
from pathlib import Path

from aiql import __version__
from aiql.bench import SynthParams, bundled_queries, generate_model, load_query_dir, run_benchmark
from aiql.errors import AiqlError, EmptySelectionError, ModelError, QuerySyntaxError, SchemaError
from aiql.evaluator import evaluate
from aiql.ingest import IMPORT_PATTERNS, IngestConfig, IngestError, scan_tree
from aiql.metamodel import Schema, default_schema, load_schema
from aiql.metrics import query_metrics
from aiql.modelstore import dump_model, load_model
from aiql.parser import parse_query
from aiql.repl import Session, run_repl
from aiql.serializer import serialize
from aiql.validator import check_query, diagnostics_json

EXIT_OK, EXIT_USER, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def _read(path: Path, what: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {what} {str(path)!r}: {exc.strerror or exc}", EXIT_IO) from None
    except UnicodeDecodeError:
        raise CliError(f"{what} {str(path)!r} is not valid UTF-8", EXIT_IO) from None


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text, "utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {str(path)!r}: {exc.strerror or exc}", EXIT_IO) from None


def resolve_schema(arg: str | None) -> Schema:
    path = arg or os.environ.get("AIQL_SCHEMA")
    if not path:
        return default_schema()
    try:
        return load_schema(_read(Path(path), "schema file"))
    except SchemaError as exc:
        raise CliError(f"schema {path!r}: {exc}", EXIT_IO) from None


def _load_model(path: Path, schema: Schema):
    try:
        return load_model(_read(path, "model file"), schema)
    except ModelError as exc:
        raise CliError(f"model {str(path)!r}: {exc}", EXIT_IO) from None


def _parse(text: str, file: str):
    try:
        return parse_query(text)
    except QuerySyntaxError as exc:
        raise CliError(exc.render(file), EXIT_USER) from None


# -- subcommands -----------------------------------------------------------------


def cmd_run(args) -> int:
    schema = resolve_schema(args.schema)
    qpath = Path(args.query)
    query = _parse(_read(qpath, "query file"), args.query)
    validated, diags = check_query(query, schema)
    for d in diags:
        print(d.render(args.query), file=sys.stderr)
    if validated is None:
        return EXIT_USER
    # header paths are relative to the query file
    model_path = Path(args.model_override) if args.model_override else qpath.parent / query.model_path
    model = _load_model(model_path, schema)
    try:
        result = evaluate(validated, model, schema)
    except EmptySelectionError as exc:
        raise CliError(f"error {args.query}: {exc}", EXIT_USER) from None
    _write(args.out, serialize(result, validated, schema, compact=args.compact))
    return EXIT_OK


def cmd_validate(args) -> int:

    schema = resolve_schema(args.schema)
    text = _read(Path(args.query), "query file")
    try:
        query = parse_query(text)
    except QuerySyntaxError as exc:
        if args.json:
            print(json.dumps([{"severity": "error", "code": "syntax", "message": exc.detail,
                               "line": exc.pos.line, "col": exc.pos.col, "template": None,
                               "file": args.query}], indent=2))
        else:
            print(exc.render(args.query), file=sys.stderr)
        return EXIT_USER
    validated, diags = check_query(query, schema)
    if args.json:
        print(diagnostics_json(diags, args.query))
    else:
        for d in diags:
            print(d.render(args.query), file=sys.stderr)
        if validated is not None:
            print(f"{args.query}: ok ({len(diags)} warning(s))")
    return EXIT_OK if validated is not None else EXIT_USER


def cmd_metrics(args) -> int:
    rows = []
    for name in args.queries:
        text = _read(Path(name), "query file")
        try:
            rows.append((name, query_metrics(text)))
        except QuerySyntaxError as exc:
            raise CliError(exc.render(name), EXIT_USER) from None
    if args.json:
        print(json.dumps([dict(file=n, **asdict(m)) for n, m in rows], indent=2))
        return EXIT_OK
    head = ("file", "queries", "outputs", "chars", "keywords", "unique")
    table = [head] + [(n, str(m.query_count), str(m.output_count), str(m.char_count),
                       str(m.keyword_total), str(m.keyword_unique)) for n, m in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(head))]
    for r in table:
        print("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))).rstrip())
    return EXIT_OK


def cmd_ingest(args) -> int:
    schema = resolve_schema(args.schema)
    cfg = IngestConfig(
        root=Path(args.root),
        include_globs=args.include or ["*"],
        exclude_globs=args.exclude if args.exclude is not None else IngestConfig(Path(".")).exclude_globs,
        system_name=args.system_name,
        edge_mode="containmentPlusImports" if args.imports else "containmentOnly",
        import_patterns=args.import_pattern or list(IMPORT_PATTERNS),
    )
    try:
        model = scan_tree(cfg, schema)
    except IngestError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    except ModelError as exc:
        raise CliError(f"the schema cannot hold an ingested tree: {exc}", EXIT_USER) from None
    _write(args.out, dump_model(model))
    n = len(model.versions[0].elements)
    print(f"ingested {n} elements from {args.root}", file=sys.stderr)
    return EXIT_OK


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(s.replace("_", "")) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid size list {text!r}") from None
    if not sizes or min(sizes) < 3:
        raise argparse.ArgumentTypeError("sizes must be integers >= 3")
    return sizes


def cmd_bench(args) -> int:

    schema = resolve_schema(args.schema)
    if args.queries:
        if not Path(args.queries).is_dir():
            raise CliError(f"cannot read query directory {args.queries!r}", EXIT_IO)
        queries = load_query_dir(Path(args.queries))
        if not queries:
            raise CliError(f"no *.aiql files in {args.queries!r}", EXIT_USER)
    else:
        queries = bundled_queries()
    for name, text in queries:
        _parse(text, name)
    models = []
    for n in args.sizes:
        params = SynthParams.for_size(n, seed=args.seed, handler_fraction=args.handler_fraction)
        models.append((f"synthetic-{n}", generate_model(params, schema)))
    try:
        report = run_benchmark(models, queries, args.reps, schema, compact=args.compact)
    except AiqlError as exc:  # validation errors in user-supplied queries
        raise CliError(f"benchmark query failed: {exc}", EXIT_USER) from None
    sys.stdout.write(report.table())
    if args.json:
        _write(Path(args.json), report.to_json())
    return EXIT_OK


def cmd_repl(args) -> int:

    schema = resolve_schema(args.schema)
    model = _load_model(Path(args.model), schema) if args.model else None
    return run_repl(Session(schema, model))


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aiql", description="Query versioned architecture models with AIQL.")
    p.add_argument("--version", action="version", version=f"aiql {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def schema_flag(sp):
        sp.add_argument("--schema", help="schema JSON file (default: $AIQL_SCHEMA, else the bundled schema)")

    sp = sub.add_parser("run", help="evaluate a query and print JSON results")
    sp.add_argument("query", help="query file")
    schema_flag(sp)
    sp.add_argument("--model-override", metavar="MODEL", help="use this model instead of the MODEL header")
    sp.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    sp.add_argument("--compact", action="store_true", help="single-line JSON")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("validate", help="check a query against the schema")
    sp.add_argument("query")
    schema_flag(sp)
    sp.add_argument("--json", action="store_true", help="print diagnostics as JSON")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("metrics", help="size and keyword counts of query files")
    sp.add_argument("queries", nargs="+", metavar="query")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("ingest", help="build a structural model from a source tree")
    sp.add_argument("root", help="directory to scan")
    schema_flag(sp)
    sp.add_argument("--out", type=Path, help="model file to write (default: stdout)")
    sp.add_argument("--include", action="append", metavar="GLOB", help="file glob to include (repeatable)")
    sp.add_argument("--exclude", action="append", metavar="GLOB",
                    help="glob to exclude (repeatable; replaces the default excludes)")
    sp.add_argument("--system-name", help="Name of the SoftwareSystem (default: root directory name)")
    sp.add_argument("--imports", action="store_true", help="add DEPENDENCY edges from import lines")
    sp.add_argument("--import-pattern", action="append", metavar="REGEX",
                    help="import regex with one group naming the target (repeatable)")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("bench", help="time the bundled queries on synthetic models")
    schema_flag(sp)
    sp.add_argument("--sizes", type=_sizes, default=[1000, 10000, 50000],
                    help="comma-separated element counts (default 1000,10000,50000)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--reps", type=int, default=5, help="timed repetitions per query (default 5)")
    sp.add_argument("--queries", help="directory of *.aiql files (default: the bundled seven)")
    sp.add_argument("--handler-fraction", type=float, default=0.1)
    sp.add_argument("--compact", action="store_true", help="time compact JSON marshaling")
    sp.add_argument("--json", metavar="FILE", help="also write the report as JSON")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("repl", help="interactive session with tab completion")
    schema_flag(sp)
    sp.add_argument("--model", help="model to query (default: each query's MODEL header)")
    sp.set_defaults(func=cmd_repl)
    return p


def main(argv: list[str] | None = None) -> int:
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USER
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "reps", 1) < 1:
        print("aiql: error: --reps must be >= 1", file=sys.stderr)
        return EXIT_USER
    if not 0.0 <= getattr(args, "handler_fraction", 0.0) <= 1.0:
        print("aiql: error: --handler-fraction must lie in [0, 1]", file=sys.stderr)
        return EXIT_USER
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc) if str(exc).startswith("error ") else f"aiql: {exc}", file=sys.stderr)
        return exc.code
    except KeyboardInterrupt:
        return EXIT_USER
    except BrokenPipeError:
        return EXIT_OK
    except Exception:
        traceback.print_exc()
        print("aiql: internal error; please report this with the traceback above", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
