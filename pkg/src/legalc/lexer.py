"""Tokenizer for the DSL code extracted from literate files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ParseError, SourcePosition
from .literate import Code


class T(Enum):
    IDENT = "identifier"
    INT = "integer literal"
    MONEY = "money literal"
    DATE = "date literal"
    KEYWORD = "keyword"
    OP = "operator"
    PUNCT = "punctuation"
    ARM = "--"
    EOF = "end of input"


KEYWORDS = {
    "declaration", "structure", "enumeration", "scope", "context", "content",
    "condition", "depends", "on", "data", "collection", "rule", "definition",
    "exception", "label", "under", "consequence", "fulfilled", "equals",
    "match", "with", "if", "then", "else", "of", "and", "or", "not",
    "true", "false", "sum", "cardinal", "for", "in", "is", "day",
    "boolean", "integer", "money", "date", "duration",
}

# Sorted longest-first for maximal munch.
OPERATORS = sorted(
    [
        "<=$", ">=$", "<=@", ">=@", "<=^", ">=^", "<=", ">=",
        "<$", ">$", "<@", ">@", "<^", ">^", "<", ">",
        "+$", "-$", "/$", "+@", "-@", "+^", "-^",
        "+", "-", "*", "/", "=",
    ],
    key=len,
    reverse=True,
)

PUNCT = ["(", ")", "[", "]", "{", "}", ":", ".", ",", ";"]

_IDENT_RE = re.compile(r"[^\W\d]\w*", re.UNICODE)
_INT_RE = re.compile(r"\d+")
_MONEY_RE = re.compile(r"\$\d[\d,]*(?:\.\d{2})?")
_DATE_RE = re.compile(r"\|(\d{4})-(\d{2})-(\d{2})\|")


@dataclass(frozen=True)
class Token:
    kind: T
    text: str
    pos: SourcePosition
    value: object = None

    def is_kw(self, word: str) -> bool:
        return self.kind is T.KEYWORD and self.text == word


def _money_cents(text: str, pos: SourcePosition) -> int:
    digits = text[1:].replace(",", "")
    if "." in digits:
        whole, frac = digits.split(".")
        return int(whole) * 100 + int(frac)
    return int(digits) * 100


def tokenize_blocks(blocks: list[Code], file: str) -> list[Token]:
    """Tokenize the concatenation of code blocks, keeping file positions."""
    tokens: list[Token] = []
    for block in blocks:
        lines = block.text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        for off, line in enumerate(lines):
            tokens.extend(_tokenize_line(line, block.position.start_line + off, file))
    last_line = tokens[-1].pos.end_line if tokens else 1
    tokens.append(Token(T.EOF, "", SourcePosition(file, last_line, 1, last_line, 2)))
    return tokens


def _tokenize_line(line: str, lineno: int, file: str) -> list[Token]:
    out: list[Token] = []
    i = 0
    n = len(line)
    while i < n:
        c = line[i]
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            break  # comment to end of line
        start_col = i + 1

        def pos(end: int) -> SourcePosition:
            return SourcePosition(file, lineno, start_col, lineno, end + 1)

        if line.startswith("--", i):
            out.append(Token(T.ARM, "--", pos(i + 2)))
            i += 2
            continue
        m = _DATE_RE.match(line, i)
        if m:
            out.append(Token(T.DATE, m.group(0), pos(m.end()), value=tuple(map(int, m.groups()))))
            i = m.end()
            continue
        m = _MONEY_RE.match(line, i)
        if m:
            out.append(Token(T.MONEY, m.group(0), pos(m.end()), value=_money_cents(m.group(0), pos(m.end()))))
            i = m.end()
            continue
        m = _IDENT_RE.match(line, i)
        if m:
            word = m.group(0)
            kind = T.KEYWORD if word in KEYWORDS else T.IDENT
            out.append(Token(kind, word, pos(m.end())))
            i = m.end()
            continue
        m = _INT_RE.match(line, i)
        if m:
            out.append(Token(T.INT, m.group(0), pos(m.end()), value=int(m.group(0))))
            i = m.end()
            continue
        for op in OPERATORS:
            if line.startswith(op, i):
                out.append(Token(T.OP, op, pos(i + len(op))))
                i += len(op)
                break
        else:
            if c in PUNCT:
                out.append(Token(T.PUNCT, c, pos(i + 1)))
                i += 1
            else:
                raise ParseError(
                    'at character "%s"' % c,
                    [("Error token:", SourcePosition(file, lineno, start_col, lineno, start_col + 1))],
                    detail="this character cannot start a token",
                )
    return out
