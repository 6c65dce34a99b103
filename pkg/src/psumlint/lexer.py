"""Tokenizer for the textual model notation.

The token stream is lossless: joining token texts with the skipped
whitespace between them reproduces the input byte-for-byte. Comments are
ordinary tokens (the parser treats them as trivia).

Annotation markers come in two equivalent spellings: the guillemets
U+00AB/U+00BB and the ASCII fallback ``<<`` / ``>>``. Inside an annotation
the lexer tracks ``<``/``>`` argument-list nesting so that ``>>>`` after an
argument list is split into ``>`` (closing the list) and ``>>`` (closing
the annotation).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from . import diagnostics
from .diagnostics import Diagnostic
from .source import SourceFile, Span


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    QUOTED_IDENTIFIER = "quoted-identifier"
    NUMBER = "number"
    STRING = "string"
    UNIT_BRACKET = "unit-bracket"
    MULTIPLICITY_BRACKET = "multiplicity-bracket"
    ANNOTATION_OPEN = "annotation-open"
    ANNOTATION_CLOSE = "annotation-close"
    PUNCTUATION = "punctuation"
    OPERATOR = "operator"
    COMMENT = "comment"
    DOC_COMMENT = "doc-comment"
    EOF = "end-of-file"


KEYWORDS = frozenset({
    "package", "import", "private", "public", "def",
    "part", "item", "port", "attribute", "action", "state", "constraint",
    "analysis", "requirement", "occurrence", "transition", "message",
    "metadata", "ref", "perform", "exhibit",
    "specializes", "redefines", "defined", "by",
    "first", "accept", "via", "if", "do", "send", "then", "entry",
    "parallel", "in", "out", "about", "at", "to",
    "assume", "require", "subject", "objective", "return", "doc",
    "measurement",
    "and", "or", "not", "true", "false",
})

# longest-match-first; ``>>`` and ``>`` are handled statefully below
_OPERATORS = ["::>", ":>>", "::", ":>", "==", ">=", "<=", "=", ":", "<", ">", "&", "~", "*"]
_PUNCTUATION = {";", "{", "}", "(", ")", ",", "."}

_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_]")
_MULTIPLICITY = re.compile(r"^(\*|\d+|\d+\.\.(\d+|\*))$")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: Span
    value: str = ""

    def __repr__(self) -> str:
        return f"Token({self.kind.value}, {self.text!r})"


def _normalize_unit(raw: str) -> str:
    """Strip brackets, whitespace and any quoting characters around a unit."""
    inner = raw.strip()
    if inner.startswith("[") and inner.endswith("]"):
        inner = inner[1:-1]
    inner = inner.strip()
    return inner.strip("`'\"").strip()


class Lexer:
    def __init__(self, source: SourceFile):
        self.source = source
        self.text = source.content
        self.pos = 0
        self.tokens: list[Token] = []
        self.diagnostics: list[Diagnostic] = []
        self.in_annotation = False
        self.angle_depth = 0

    def _span(self, start: int, end: int) -> Span:
        return self.source.span(start, end)

    def _emit(self, kind: TokenKind, start: int, end: int, value: str = "") -> None:
        self.tokens.append(Token(kind, self.text[start:end], self._span(start, end), value))

    def _diag(self, code: str, start: int, end: int, message: str) -> None:
        self.diagnostics.append(diagnostics.make(code, self._span(start, end), message))

    def _line_end(self, pos: int) -> int:
        nl = self.text.find("\n", pos)
        return len(self.text) if nl < 0 else nl

    def run(self) -> tuple[list[Token], list[Diagnostic]]:
        text = self.text
        n = len(text)
        while self.pos < n:
            ch = text[self.pos]
            if ch == "\n" and self.in_annotation:
                # annotations do not span lines
                self._diag("P005", self.pos, self.pos, "annotation not closed before end of line")
                self.in_annotation = False
                self.angle_depth = 0
            if ch in " \t\r\n":
                self.pos += 1
                continue
            if ch == "«":
                self._emit(TokenKind.ANNOTATION_OPEN, self.pos, self.pos + 1)
                self.in_annotation, self.angle_depth = True, 0
                self.pos += 1
                continue
            if ch == "»":
                self._emit(TokenKind.ANNOTATION_CLOSE, self.pos, self.pos + 1)
                self.in_annotation, self.angle_depth = False, 0
                self.pos += 1
                continue
            if text.startswith("//", self.pos):
                end = self._line_end(self.pos)
                self._emit(TokenKind.COMMENT, self.pos, end)
                self.pos = end
                continue
            if text.startswith("/*", self.pos):
                close = text.find("*/", self.pos + 2)
                if close < 0:
                    self._diag("P004", self.pos, n, "block comment is never closed")
                    self._emit(TokenKind.DOC_COMMENT, self.pos, n)
                    self.pos = n
                else:
                    self._emit(TokenKind.DOC_COMMENT, self.pos, close + 2)
                    self.pos = close + 2
                continue
            if text.startswith("<<", self.pos) and not self.in_annotation:
                self._emit(TokenKind.ANNOTATION_OPEN, self.pos, self.pos + 2)
                self.in_annotation, self.angle_depth = True, 0
                self.pos += 2
                continue
            if ch == '"':
                self._lex_string()
                continue
            if ch == "`":
                self._lex_quoted(opener="`", closer="'")
                continue
            if ch == "'":
                self._lex_quoted(opener="'", closer="'")
                continue
            if ch == "[":
                self._lex_bracket()
                continue
            if ch.isdigit():
                self._lex_number()
                continue
            if _IDENT_START.match(ch):
                self._lex_word()
                continue
            if self._lex_operator():
                continue
            self._diag("P008", self.pos, self.pos + 1, f"stray character {ch!r}")
            self._emit(TokenKind.PUNCTUATION, self.pos, self.pos + 1)
            self.pos += 1
        if self.in_annotation:
            self._diag("P005", n, n, "annotation not closed before end of file")
        self.tokens.append(Token(TokenKind.EOF, "", self._span(n, n)))
        return self.tokens, self.diagnostics

    def _lex_operator(self) -> bool:
        text, pos = self.text, self.pos
        if self.in_annotation:
            # statefully disambiguate > / >> against the ASCII close marker
            if text.startswith(">>", pos) and self.angle_depth == 0:
                self._emit(TokenKind.ANNOTATION_CLOSE, pos, pos + 2)
                self.in_annotation = False
                self.pos = pos + 2
                return True
            if text[pos] == "<":
                self.angle_depth += 1
                self._emit(TokenKind.OPERATOR, pos, pos + 1)
                self.pos = pos + 1
                return True
            if text[pos] == ">":
                self.angle_depth = max(0, self.angle_depth - 1)
                self._emit(TokenKind.OPERATOR, pos, pos + 1)
                self.pos = pos + 1
                return True
        for op in _OPERATORS:
            if text.startswith(op, pos):
                self._emit(TokenKind.OPERATOR, pos, pos + len(op))
                self.pos = pos + len(op)
                return True
        if text[pos] in _PUNCTUATION:
            self._emit(TokenKind.PUNCTUATION, pos, pos + 1)
            self.pos = pos + 1
            return True
        return False

    def _lex_string(self) -> None:
        start = self.pos
        end = self.text.find('"', start + 1)
        line_end = self._line_end(start)
        if end < 0 or end > line_end:
            self._diag("P003", start, line_end, "string is never closed")
            self._emit(TokenKind.STRING, start, line_end, self.text[start + 1:line_end])
            self.pos = line_end
            return
        self._emit(TokenKind.STRING, start, end + 1, self.text[start + 1:end])
        self.pos = end + 1

    def _lex_quoted(self, opener: str, closer: str) -> None:
        start = self.pos
        end = self.text.find(closer, start + 1)
        line_end = self._line_end(start)
        if end < 0 or end > line_end:
            self._diag("P006", start, line_end, "quoted name is never closed")
            self._emit(TokenKind.QUOTED_IDENTIFIER, start, line_end, self.text[start + 1:line_end])
            self.pos = line_end
            return
        self._emit(TokenKind.QUOTED_IDENTIFIER, start, end + 1, self.text[start + 1:end])
        self.pos = end + 1

    def _lex_bracket(self) -> None:
        start = self.pos
        end = self.text.find("]", start + 1)
        line_end = self._line_end(start)
        if end < 0 or end > line_end:
            self._diag("P007", start, line_end, "bracket is never closed")
            self._emit(TokenKind.UNIT_BRACKET, start, line_end,
                       _normalize_unit(self.text[start + 1:line_end]))
            self.pos = line_end
            return
        inner = self.text[start + 1:end].strip()
        if _MULTIPLICITY.match(inner):
            self._emit(TokenKind.MULTIPLICITY_BRACKET, start, end + 1, inner)
        else:
            self._emit(TokenKind.UNIT_BRACKET, start, end + 1,
                       _normalize_unit(self.text[start + 1:end]))
        self.pos = end + 1

    def _lex_number(self) -> None:
        start = self.pos
        m = re.match(r"\d+(\.\d+)?", self.text[start:])
        end = start + m.end()
        self._emit(TokenKind.NUMBER, start, end, self.text[start:end])
        self.pos = end

    def _lex_word(self) -> None:
        start = self.pos
        end = start + 1
        while end < len(self.text) and _IDENT_BODY.match(self.text[end]):
            end += 1
        word = self.text[start:end]
        kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENTIFIER
        self._emit(kind, start, end, word)
        self.pos = end


def tokenize(source: SourceFile) -> tuple[list[Token], list[Diagnostic]]:
    """Full token list (ending with an EOF token) plus lexical diagnostics."""
    return Lexer(source).run()


def reconstruct(source: SourceFile, tokens: list[Token]) -> str:
    """Rebuild the input from the token stream plus inter-token gaps."""
    parts = []
    prev_end = 0
    for tok in tokens:
        parts.append(source.content[prev_end:tok.span.start])
        parts.append(tok.text)
        prev_end = tok.span.end
    parts.append(source.content[prev_end:])
    return "".join(parts)
