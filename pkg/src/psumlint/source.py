"""Source file handling: byte-offset bookkeeping and spans.

Every token, syntax node, element and diagnostic carries a Span pointing
back into a SourceFile, so downstream consumers can render file:line:column
locations without re-scanning the input.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field


@dataclass
class SourceFile:
    """One model file: path, full text, and an index of line-start offsets."""

    path: str
    content: str
    line_index: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.line_index:
            index = [0]
            for i, ch in enumerate(self.content):
                if ch == "\n":
                    index.append(i + 1)
            self.line_index = index

    @classmethod
    def read(cls, path: str) -> "SourceFile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(path=path, content=fh.read())

    def line_col(self, offset: int) -> tuple[int, int]:
        """1-based (line, column) for a character offset."""
        offset = max(0, min(offset, len(self.content)))
        line = bisect.bisect_right(self.line_index, offset) - 1
        return line + 1, offset - self.line_index[line] + 1

    def span(self, start: int, end: int) -> "Span":
        line, col = self.line_col(start)
        return Span(file=self, start=start, end=end, line=line, column=col)


@dataclass(frozen=True)
class Span:
    """Half-open [start, end) character range within one file."""

    file: SourceFile
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        assert 0 <= self.start <= self.end <= len(self.file.content)

    @property
    def text(self) -> str:
        return self.file.content[self.start:self.end]

    def location(self) -> str:
        return f"{self.file.path}:{self.line}:{self.column}"

    def __repr__(self) -> str:  # keep reprs short in test failures
        return f"Span({self.location()}+{self.end - self.start})"


def cover(a: Span, b: Span) -> Span:
    """Smallest span covering both a and b (same file)."""
    start = min(a.start, b.start)
    end = max(a.end, b.end)
    return a.file.span(start, end)
