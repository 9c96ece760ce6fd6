"""Tokenize C/C++/Java sources and turn them into occurrence-indexed trigram sets.

The scanner is deliberately shallow: it strips comments and whitespace,
keeps identifiers and literals verbatim (string and character literals are
single tokens, quotes included), keeps preprocessor punctuation, and splits
operators by maximal munch. It does not parse.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import UnsupportedLanguageError

# Boundary marker padded around every token stream. The scanner can never
# emit an empty token, so this cannot collide with real code.
SENTINEL = ""

Trigram = tuple[str, str, str, int]


class Language(enum.Enum):
    C_CPP = "c/c++"
    JAVA = "java"
    UNKNOWN = "unknown"


_C_EXTENSIONS = {".c", ".h", ".cc", ".cpp", ".cxx", ".hh", ".hpp", ".hxx"}
_JAVA_EXTENSIONS = {".java"}


def language_for_path(path: Union[str, Path]) -> Language:
    ext = Path(path).suffix.lower()
    if ext in _C_EXTENSIONS:
        return Language.C_CPP
    if ext in _JAVA_EXTENSIONS:
        return Language.JAVA
    return Language.UNKNOWN


@dataclass(frozen=True)
class SourceFile:
    path: str
    language: Language
    content: bytes

    @classmethod
    def from_path(cls, path: Union[str, Path], relative_to: Union[str, Path, None] = None) -> "SourceFile":
        p = Path(path)
        rel = p.relative_to(relative_to) if relative_to is not None else p
        return cls(path=rel.as_posix(), language=language_for_path(p), content=p.read_bytes())

    @classmethod
    def from_bytes(cls, path: str, content: bytes) -> "SourceFile":
        return cls(path=path, language=language_for_path(path), content=content)

    @classmethod
    def from_text(cls, path: str, text: str) -> "SourceFile":
        return cls.from_bytes(path, text.encode("utf-8"))


@dataclass
class TokenSequence:
    tokens: list[str] = field(default_factory=list)
    had_decode_errors: bool = False

    @property
    def count(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


_C_OPERATORS = [
    "<<=", ">>=", "...", "->*", "<=>",
    "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##", ".*",
]

_JAVA_OPERATORS = [
    ">>>=",
    ">>>", "<<=", ">>=", "...",
    "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=",
]


def _scanner(operators: list[str], digit_separator_quote: bool) -> re.Pattern[str]:
    ops = "|".join(re.escape(op) for op in sorted(operators, key=len, reverse=True))
    # pp-number style numeric literals: suffixes, hex/bin digits, exponent
    # signs and (for C++) quote digit separators all stay in one token.
    number_parts = ["[eEpP][+-]"]
    if digit_separator_quote:
        number_parts.append("'(?=[0-9a-fA-F])")
    number_parts.append(r"[\w.]")
    number = r"\.?[0-9](?:" + "|".join(number_parts) + ")*"
    pattern = (
        r"(?P<ws>\s+)"
        r"|(?P<line_comment>//[^\n]*)"
        r"|(?P<block_comment>/\*.*?\*/|/\*.*)"
        r'|(?P<string>"(?:\\.|[^"\\\n])*"?)'
        r"|(?P<char>'(?:\\.|[^'\\\n])*'?)"
        rf"|(?P<number>{number})"
        r"|(?P<ident>(?:[^\W\d]|\$)(?:\w|\$)*)"
        rf"|(?P<op>{ops}|.)"
    )
    return re.compile(pattern, re.DOTALL)


_SCANNERS = {
    Language.C_CPP: _scanner(_C_OPERATORS, digit_separator_quote=True),
    Language.JAVA: _scanner(_JAVA_OPERATORS, digit_separator_quote=False),
}

_SKIP_GROUPS = frozenset({"ws", "line_comment", "block_comment"})


def tokenize(source: SourceFile) -> TokenSequence:
    """Split a source file into its token stream, dropping comments and whitespace.

    Undecodable byte sequences are replaced and the result is flagged rather
    than aborting, so one bad file never stops an ingest.
    """
    if source.language is Language.UNKNOWN:
        raise UnsupportedLanguageError(f"no supported language for {source.path!r}")
    try:
        text = source.content.decode("utf-8-sig")
        flagged = False
    except UnicodeDecodeError:
        text = source.content.decode("utf-8-sig", errors="replace")
        flagged = True
    if source.language is Language.C_CPP:
        # Phase-2 line splicing: backslash-newline disappears everywhere,
        # including inside literals and preprocessor directives.
        text = text.replace("\\\r\n", "").replace("\\\n", "")
    scanner = _SCANNERS[source.language]
    tokens = [m.group() for m in scanner.finditer(text) if m.lastgroup not in _SKIP_GROUPS]
    return TokenSequence(tokens, had_decode_errors=flagged)


def _token_list(seq: Union[TokenSequence, Sequence[str], Iterable[str]]) -> list[str]:
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return list(seq)


def trigrams(seq: Union[TokenSequence, Sequence[str]]) -> frozenset[Trigram]:
    """Occurrence-indexed trigram set of a token stream.

    The stream is padded with two sentinels on each side so file boundaries
    show up in the trigrams; each (a, b, c) window carries its 1-based
    occurrence index within the file, which makes plain set intersection
    behave like multiset min-count intersection. A stream of t >= 1 tokens
    yields exactly t + 2 trigrams; an empty stream yields the empty set.
    """
    tokens = _token_list(seq)
    if not tokens:
        return frozenset()
    padded = [SENTINEL, SENTINEL, *tokens, SENTINEL, SENTINEL]
    seen: Counter[tuple[str, str, str]] = Counter()
    out = []
    for i in range(len(padded) - 2):
        triple = (padded[i], padded[i + 1], padded[i + 2])
        seen[triple] += 1
        out.append((*triple, seen[triple]))
    return frozenset(out)


def jaccard(x: frozenset[Trigram], y: frozenset[Trigram]) -> float:
    """Jaccard index of two trigram sets; two empty files count as identical."""
    if not x and not y:
        return 1.0
    return len(x & y) / len(x | y)
