"""Size and keyword measurements for query text.

Identifiers, strings, numbers and dates count as one character each;
keywords, operators and punctuation count at their written length; a single
space is counted wherever two word-like tokens would otherwise fuse.
Comments and layout whitespace are ignored.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from aiql.lexer import tokenize
from aiql.parser import parse_query

_DYNAMIC = ("IDENT", "STRING", "INT", "FLOAT", "DATE")


@dataclass(frozen=True)
class QueryMetrics:
    query_count: int
    output_count: int
    char_count: int
    keyword_total: int
    keyword_unique: int

    def as_dict(self) -> dict:
        return asdict(self)


def query_metrics(text: str) -> QueryMetrics:
    query = parse_query(text)
    tokens = tokenize(text)
    chars = 0
    prev = None
    for tok in tokens:
        if tok.kind in _DYNAMIC:
            chars += 1 + (1 if tok.escaped else 0)
        else:
            chars += len(str(tok.value))
        if prev is not None and prev.wordlike and tok.wordlike and not tok.escaped:
            chars += 1
        prev = tok
    keywords = [t.value for t in tokens if t.kind == "KW"]
    return QueryMetrics(
        query_count=1,
        output_count=len(query.outputs),
        char_count=chars,
        keyword_total=len(keywords),
        keyword_unique=len(set(keywords)),
    )
