"""Structured errors and their rendering.

Every pipeline error carries a message plus a list of (label, position)
attachments; rendering prints a source excerpt with caret underlining for
each attachment, in input order, so golden tests can diff stderr byte for
byte.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class SourcePosition:
    """1-based, inclusive-start exclusive-end-column span in one file."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self):
        assert self.start_line >= 1 and self.start_col >= 1
        assert (self.start_line, self.start_col) <= (self.end_line, self.end_col)

    def __str__(self) -> str:
        return "%s:%d.%d-%d.%d" % (
            self.file,
            self.start_line,
            self.start_col,
            self.end_line,
            self.end_col,
        )

    @staticmethod
    def merge(a: "SourcePosition", b: "SourcePosition") -> "SourcePosition":
        start = min((a.start_line, a.start_col), (b.start_line, b.start_col))
        end = max((a.end_line, a.end_col), (b.end_line, b.end_col))
        return SourcePosition(a.file, start[0], start[1], end[0], end[1])


class StructuredError(Exception):
    """Base for all user-facing errors.

    `positions` is a list of (optional label, position) pairs; labels like
    "Error token:" introduce each excerpt in the rendering.
    """

    kind = "Error"

    def __init__(
        self,
        message: str,
        positions: list[tuple[str | None, SourcePosition]] | None = None,
        suggestions: list[str] | None = None,
        detail: str | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.positions = positions or []
        self.suggestions = suggestions or []
        self.detail = detail

    def headline(self) -> str:
        return "%s: %s" % (self.kind, self.message)


class UnterminatedFence(StructuredError):
    pass


class ParseError(StructuredError):
    kind = "Syntax error"

    def headline(self) -> str:
        # Matches the "Syntax error at token ..." report shape.
        return "%s %s" % (self.kind, self.message)


class DesugarError(StructuredError):
    pass


class AmbiguousException(DesugarError):
    pass


class UnknownLabel(DesugarError):
    pass


class MultipleRoots(DesugarError):
    pass


class LabelCycle(DesugarError):
    pass


class CycleError(StructuredError):
    """A dependency cycle among the variables of one scope."""


class ScopeRecursionError(StructuredError):
    """A cycle in the scope call graph, including a scope using itself."""


class TypecheckError(StructuredError):
    kind = "Type error"


class ConflictError(StructuredError):
    """Two or more definitions applied at the same time at run time."""

    kind = "Conflict error"


class NeverDefinedError(StructuredError):
    """A variable was read but no definition applied to it."""


class DivergedError(StructuredError):
    """Step budget exceeded (only reachable from the random-term harness)."""


class UnsupportedConstruct(StructuredError):
    """Defensive backend error; unreachable from the normal pipeline."""


class UsageError(StructuredError):
    """Bad command-line invocation; exits with status 2."""


_RED = "\x1b[31;1m"
_RESET = "\x1b[0m"


def _want_color(stream) -> bool:
    if os.environ.get("LEGALC_NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


@dataclass
class _SourceCache:
    files: dict[str, list[str]] = field(default_factory=dict)

    def lines(self, path: str) -> list[str]:
        if path not in self.files:
            try:
                with open(path, "r", encoding="utf-8") as f:
                    self.files[path] = f.read().splitlines()
            except OSError:
                self.files[path] = []
        return self.files[path]


def _excerpt(lines: list[str], pos: SourcePosition, out: list[str]) -> None:
    out.append("   --> %s" % pos.file)
    gutter = len(str(pos.end_line))
    out.append(" %s |" % (" " * gutter))
    for ln in range(pos.start_line, pos.end_line + 1):
        text = lines[ln - 1] if ln - 1 < len(lines) else ""
        out.append(" %*d | %s" % (gutter, ln, text))
        lo = pos.start_col if ln == pos.start_line else 1
        hi = pos.end_col if ln == pos.end_line else max(len(text), 1) + 1
        hi = max(hi, lo + 1)
        out.append(" %s | %s%s" % (" " * gutter, " " * (lo - 1), "^" * (hi - lo)))


def format_error(err: StructuredError, source_text: dict[str, str] | None = None) -> str:
    """Render a structured error to its stable multi-line text form.

    `source_text` optionally maps file names to contents (used when the file
    is not on disk, e.g. in tests); otherwise files are read lazily.
    """
    cache = _SourceCache()
    if source_text:
        for name, text in source_text.items():
            cache.files[name] = text.splitlines()
    out = [err.headline()]
    if err.detail:
        out.append("Message: %s" % err.detail)
    if err.suggestions:
        shown = ['"%s"' % s for s in err.suggestions[:10]]
        tail = "?" if len(err.suggestions) <= 10 else ", [...]"
        out.append("Autosuggestion: did you mean %s%s" % (", or maybe ".join(shown), tail))
    for label, pos in err.positions:
        if label:
            out.append(label)
        _excerpt(cache.lines(pos.file), pos, out)
    return "\n".join(out)


def print_error(err: StructuredError, stream=None) -> None:
    stream = stream if stream is not None else sys.stderr
    text = format_error(err)
    if _want_color(stream):
        head, _, rest = text.partition("\n")
        text = _RED + head + _RESET + ("\n" + rest if rest else "")
    print("[ERROR] " + text.replace("\n", "\n[ERROR] "), file=stream)
