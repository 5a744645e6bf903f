"""Interactive query session.

Lines accumulate into a query until a line consisting of ``;;`` alone.
Lines starting with ``:`` are meta-commands.  Input comes from any text
stream, so the session runs the same under tests as at a terminal; when
attached to a terminal, readline provides history and tab completion.
"""

from __future__ import annotations

import sys
from pathlib import Path

from aiql.completion import Completer
from aiql.errors import AiqlError, QuerySyntaxError
from aiql.evaluator import evaluate
from aiql.metamodel import Schema, all_attributes, all_references, shortcuts_for
from aiql.modelstore import VersionedModel, load_model
from aiql.parser import parse_query
from aiql.serializer import serialize
from aiql.validator import check_query, template_order

PROMPT = "aiql> "
CONTINUATION = "  ... "
HELP = """\
Type a query over several lines and finish it with a line containing only ;;
  :templates   templates of the last validated query, in evaluation order
  :schema      classes, members and shortcuts of the active schema
  :help        this text
  :quit        leave the session
Press Tab for proposals."""


def describe_schema(schema: Schema) -> str:
    lines = []
    for c in schema.classes:
        head = c.name + (" (abstract)" if c.abstract else "")
        if c.supertype:
            head += f" extends {c.supertype}"
        lines.append(head)
        for a in all_attributes(schema, c.name):
            kind = a.type + (" {" + ", ".join(a.literals) + "}" if a.literals else "")
            lines.append(f"    {a.name}: {kind}")
        for r in all_references(schema, c.name):
            lines.append(f"    {r.name} -> {r.target} [{r.upper_bound}]")
        for s in shortcuts_for(schema, c.name):
            lines.append(f"    {s.name} => {s.target} [{s.upper_bound}] via {'.'.join(s.path)}")
    return "\n".join(lines)


class Session:
    def __init__(self, schema: Schema, model: VersionedModel | None = None,
                 out=None, err=None, base_dir: Path | None = None):
        self.schema = schema
        self.model = model
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.base_dir = base_dir or Path.cwd()
        self.buffer: list[str] = []
        self.last = None
        self.completer = Completer(schema)
        self._models: dict[Path, VersionedModel] = {}

    @property
    def pending(self) -> str:
        return "\n".join(self.buffer)

    def feed(self, line: str) -> bool:
        """Consume one input line; return False when the session should end."""
        stripped = line.strip()
        if stripped == ";;":
            text, self.buffer = self.pending, []
            if text.strip():
                self.execute(text)
            return True
        if not self.buffer and stripped.startswith(":"):
            return self.command(stripped)
        self.buffer.append(line.rstrip("\n"))
        return True

    def command(self, cmd: str) -> bool:
        if cmd in (":quit", ":q", ":exit"):
            return False
        if cmd == ":schema":
            print(describe_schema(self.schema), file=self.out)
        elif cmd == ":templates":
            if self.last is None:
                print("no validated query yet", file=self.out)
            for tid in template_order(self.last) if self.last else ():
                t = self.last.templates[tid]
                deps = t.dependencies()
                print(f"{tid}: {t.cls.name}" + (f" (uses {', '.join(deps)})" if deps else ""), file=self.out)
        elif cmd == ":help":
            print(HELP, file=self.out)
        else:
            print(f"unknown command {cmd}; try :help", file=self.err)
        return True

    def _model_for(self, path: str) -> VersionedModel:
        if self.model is not None:
            return self.model
        full = (self.base_dir / path).resolve()
        if full not in self._models:
            self._models[full] = load_model(full.read_text("utf-8"), self.schema)
        return self._models[full]

    def execute(self, text: str) -> None:
        try:
            query = parse_query(text)
        except QuerySyntaxError as exc:
            print(exc.render("<repl>"), file=self.err)
            return
        validated, diags = check_query(query, self.schema)
        for d in diags:
            print(d.render("<repl>"), file=self.err)
        if validated is None:
            return
        self.last = validated
        try:
            model = self._model_for(query.model_path)
            result = evaluate(validated, model, self.schema)
        except OSError as exc:
            print(f"error: cannot read model {query.model_path!r}: {exc.strerror}", file=self.err)
            return
        except AiqlError as exc:
            print(f"error: {exc}", file=self.err)
            return
        self.out.write(serialize(result, validated, self.schema))

    def complete(self, text: str) -> list[str]:
        """Proposals for the word at the end of ``text``, given the lines entered so far."""
        full = self.pending + "\n" + text if self.buffer else text
        return self.completer.complete(full)


def _install_readline(session: Session):
    try:
        import readline
    except ImportError:  # not available on every platform
        return
    matches: list[str] = []

    def hook(_text, state):
        nonlocal matches
        if state == 0:
            line = readline.get_line_buffer()[:readline.get_endidx()]
            matches = session.complete(line)
        return matches[state] if state < len(matches) else None

    readline.set_completer_delims(" \t\n()[]{};:,'\"<>=+-*/")
    readline.set_completer(hook)
    readline.parse_and_bind("tab: complete")


def run_repl(session: Session, stdin=None, interactive: bool | None = None) -> int:
    stdin = stdin or sys.stdin
    if interactive is None:
        interactive = stdin.isatty()
    if interactive:
        _install_readline(session)
        print(HELP, file=session.out)
        while True:
            try:
                line = input(CONTINUATION if session.buffer else PROMPT)
            except EOFError:
                print(file=session.out)
                return 0
            except KeyboardInterrupt:
                session.buffer = []
                print(file=session.out)
                continue
            if not session.feed(line):
                return 0
    for line in stdin:
        if not session.feed(line):
            return 0
    if session.buffer and session.pending.strip():
        print("warning: unterminated query discarded (end it with ;;)", file=session.err)
    return 0

