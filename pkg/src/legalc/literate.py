"""Literate source handling: split law text from fenced DSL code blocks.

A code block is the region between a line that is exactly ```catala and the
next line that is exactly ```; everything else (including other fenced
languages) is prose. Concatenating the blocks with their fences restored
reproduces the input byte for byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SourcePosition, UnterminatedFence

OPEN_FENCE = "```catala"
CLOSE_FENCE = "```"

_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*?)\s*$")


@dataclass(frozen=True)
class Prose:
    text: str
    heading_level: int | None = None


@dataclass(frozen=True)
class Code:
    text: str
    position: SourcePosition
    # Fence lines kept verbatim so reconstruction is byte-exact even when
    # the closing fence lacks a trailing newline.
    open_fence: str = OPEN_FENCE + "\n"
    close_fence: str = CLOSE_FENCE + "\n"


@dataclass
class LiterateDocument:
    file: str
    blocks: list[Prose | Code] = field(default_factory=list)

    def code_blocks(self) -> list[Code]:
        return [b for b in self.blocks if isinstance(b, Code)]

    def reconstruct(self) -> str:
        parts = []
        for b in self.blocks:
            if isinstance(b, Prose):
                parts.append(b.text)
            else:
                parts.extend((b.open_fence, b.text, b.close_fence))
        return "".join(parts)

    def breadcrumb(self, line: int) -> str:
        """Law-heading trail for the prose preceding a source line."""
        trail: list[tuple[int, str]] = []
        at = 1
        for b in self.blocks:
            if at > line:
                break
            if isinstance(b, Prose):
                for text_line in _split_lines_keepends(b.text):
                    if at > line:
                        break
                    m = _HEADING_RE.match(text_line.rstrip("\n"))
                    if m:
                        level = len(m.group(1))
                        while trail and trail[-1][0] >= level:
                            trail.pop()
                        trail.append((level, m.group(2)))
                    at += 1
            else:
                at += b.text.count("\n") + 2  # fences included
        return " > ".join(t for _, t in trail)


def _split_lines_keepends(text: str) -> list[str]:
    # Strictly newline-delimited: unicode breaks like \x85 are line content.
    parts = text.split("\n")
    out = [p + "\n" for p in parts[:-1]]
    if parts[-1]:
        out.append(parts[-1])
    return out


def extract_blocks(text: str, file: str = "<input>") -> LiterateDocument:
    """Split a literate file into prose and ```catala code blocks."""
    doc = LiterateDocument(file=file)
    lines = _split_lines_keepends(text)
    prose: list[str] = []
    prose_start = 1

    def flush_prose(upto: int) -> None:
        nonlocal prose, prose_start
        if prose:
            run = "".join(prose)
            # Headings become their own blocks so breadcrumbs can find them.
            for piece, level in _split_headings(run):
                doc.blocks.append(Prose(piece, level))
            prose = []
        prose_start = upto

    i = 0
    while i < len(lines):
        raw = lines[i]
        if raw.rstrip("\r\n") == OPEN_FENCE:
            fence_line = i + 1
            body: list[str] = []
            j = i + 1
            while j < len(lines) and lines[j].rstrip("\r\n") != CLOSE_FENCE:
                body.append(lines[j])
                j += 1
            if j >= len(lines):
                raise UnterminatedFence(
                    "code block opened here is never closed",
                    [(None, SourcePosition(file, fence_line, 1, fence_line, len(OPEN_FENCE) + 1))],
                )
            flush_prose(fence_line)
            first = fence_line + 1
            last = max(j, first)  # empty block: degenerate span on fence line
            width = len(body[-1].rstrip("\n")) + 1 if body else 1
            doc.blocks.append(
                Code(
                    "".join(body),
                    SourcePosition(file, first, 1, last, width),
                    open_fence=raw,
                    close_fence=lines[j],
                )
            )
            i = j + 1
        else:
            prose.append(raw)
            i += 1
    flush_prose(len(lines) + 1)
    return doc


def _split_headings(run: str) -> list[tuple[str, int | None]]:
    pieces: list[tuple[str, int | None]] = []
    plain: list[str] = []
    for line in _split_lines_keepends(run):
        m = _HEADING_RE.match(line.rstrip("\n"))
        if m:
            if plain:
                pieces.append(("".join(plain), None))
                plain = []
            pieces.append((line, len(m.group(1))))
        else:
            plain.append(line)
    if plain:
        pieces.append(("".join(plain), None))
    return pieces
