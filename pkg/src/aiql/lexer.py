"""Tokenizer for AIQL query text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime

from aiql.errors import Position, QuerySyntaxError

KEYWORDS = frozenset({
    "MODEL", "VERSION", "FIRST", "LAST",
    "LIST", "RESTRICTIONS", "OR", "NOT",
    "EXISTS", "FOR_ALL", "COUNT", "RANGE",
    "OUTPUT", "ORDER_BY", "ASC", "DESC", "ATTRIBUTE",
    "true", "false",
})

COMPARATOR_CHARS = ("<=", ">=", "<", ">", "=")
PUNCT = {"(": "LPAREN", ")": "RPAREN", ";": "SEMI", ",": "COMMA", ":": "COLON"}
ARITH_OPS = "+-*/"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_DATE = re.compile(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}")
_NUMBER = re.compile(r"\d+(\.\d+)?")


@dataclass(frozen=True)
class Token:
    kind: str       # KW IDENT STRING INT FLOAT DATE CMP ARITH LPAREN RPAREN SEMI COMMA COLON EOF
    value: object
    pos: Position
    end: int
    escaped: bool = False

    @property
    def wordlike(self) -> bool:
        """Would this token fuse with an adjacent word-like token without a space?"""
        return self.kind in ("KW", "IDENT", "INT", "FLOAT", "DATE")

    def __repr__(self) -> str:
        return f"{self.kind}({self.value!r})"


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body) and body[i + 1] in "\\'\"":
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def pos(self) -> Position:
        return Position(self.i, self.line, self.col)

    def advance(self, n: int) -> None:
        for ch in self.text[self.i:self.i + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.i += n


def tokenize(text: str, *, include_eof: bool = False) -> list[Token]:
    cur = _Cursor(text)
    tokens: list[Token] = []
    n = len(text)
    while cur.i < n:
        ch = text[cur.i]
        if ch in " \t\r\n\f":
            cur.advance(1)
            continue
        if text.startswith("//", cur.i):
            end = text.find("\n", cur.i)
            cur.advance((n if end < 0 else end) - cur.i)
            continue
        start = cur.pos()

        if ch in "'\"":
            j = cur.i + 1
            while j < n and text[j] != ch and text[j] != "\n":
                j += 2 if text[j] == "\\" and j + 1 < n and text[j + 1] != "\n" else 1
            if j >= n or text[j] != ch:
                raise QuerySyntaxError("unterminated string", start)
            value = _unescape(text[cur.i + 1:j])
            cur.advance(j + 1 - cur.i)
            tokens.append(Token("STRING", value, start, cur.i))
            continue

        if ch == "^" or ch.isalpha() or ch == "_":
            escaped = ch == "^"
            m = _IDENT.match(text, cur.i + 1 if escaped else cur.i)
            if m is None:
                raise QuerySyntaxError("'^' must be followed by an identifier", start)
            word = m.group()
            cur.advance(m.end() - cur.i)
            if word in KEYWORDS and not escaped:
                tokens.append(Token("KW", word, start, cur.i))
            else:
                tokens.append(Token("IDENT", word, start, cur.i, escaped))
            continue

        if ch.isdigit():
            m = _DATE.match(text, cur.i)
            if m is not None:
                try:
                    value = datetime.strptime(m.group(), "%Y-%m-%dT%H:%M:%S")
                except ValueError:
                    raise QuerySyntaxError(f"invalid date {m.group()!r}", start) from None
                cur.advance(m.end() - cur.i)
                tokens.append(Token("DATE", value, start, cur.i))
                continue
            m = _NUMBER.match(text, cur.i)
            lexeme = m.group()
            cur.advance(m.end() - cur.i)
            if m.group(1):
                tokens.append(Token("FLOAT", float(lexeme), start, cur.i))
            else:
                tokens.append(Token("INT", int(lexeme), start, cur.i))
            continue

        two = text[cur.i:cur.i + 2]
        if two in ("<=", ">="):
            cur.advance(2)
            tokens.append(Token("CMP", two, start, cur.i))
            continue
        if ch in "<>=":
            cur.advance(1)
            tokens.append(Token("CMP", ch, start, cur.i))
            continue
        if ch in ARITH_OPS:
            cur.advance(1)
            tokens.append(Token("ARITH", ch, start, cur.i))
            continue
        if ch in PUNCT:
            cur.advance(1)
            tokens.append(Token(PUNCT[ch], ch, start, cur.i))
            continue
        raise QuerySyntaxError(f"illegal character {ch!r}", start)

    if include_eof:
        tokens.append(Token("EOF", None, cur.pos(), cur.i))
    return tokens
