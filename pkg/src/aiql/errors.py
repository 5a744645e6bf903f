"""Exception types shared across the engine."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Position:
    offset: int
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class AiqlError(Exception):
    """Base class for all user-facing errors."""


class _ProblemsError(AiqlError):
    def __init__(self, message: str, problems: list[str] | None = None):
        self.problems = problems or [message]
        if self.problems == [message]:
            text = message
        elif len(self.problems) == 1:
            text = f"{message}: {self.problems[0]}"
        else:
            text = message + "\n  " + "\n  ".join(self.problems)
        super().__init__(text)


class SchemaError(_ProblemsError):
    pass


class ModelError(_ProblemsError):
    """Raised when a model document does not conform to its schema.

    ``problems`` carries every conformance issue found, not just the first.
    """


class QuerySyntaxError(AiqlError):
    def __init__(self, message: str, pos: Position, expected: frozenset[str] = frozenset()):
        self.message = message
        self.pos = pos
        self.expected = expected
        super().__init__(f"{pos}: {self.detail}")

    @property
    def detail(self) -> str:
        if not self.expected:
            return self.message
        return f"{self.message} (expected one of: {', '.join(sorted(self.expected))})"

    def render(self, file: str = "<query>") -> str:
        """Same layout as validator diagnostics."""
        return f"error {file}:{self.pos.line}:{self.pos.col} syntax {self.detail}"


class EmptySelectionError(AiqlError):
    pass


class QueryValidationError(AiqlError):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("\n".join(d.render() for d in diagnostics))
