"""Moses-style tokenization and transcript parsing.

The tokenizer splits punctuation off words the way the Moses tokenizer does
for the languages of the corpus, with two deliberate protections: decimal
numbers and a small list of abbreviations keep their internal/trailing
punctuation, and runs of three or more dots stay together as a single pause
token. Word-internal hyphens and apostrophes are never split.
"""

from __future__ import annotations

import re

from .model import SOURCE, Token, TranscriptSide

# Abbreviations kept intact with their trailing period (lower-cased lookup).
_ABBREVIATIONS = frozenset(
    {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "etc.", "e.g.", "i.e.", "vs.", "cf.",
        "no.", "st.",
        # cs
        "např.", "atd.", "apod.", "tzv.", "tj.", "resp.", "č.", "str.",
        # de
        "z.b.", "bzw.", "usw.", "ca.", "nr.",
        # es
        "sr.", "sra.", "ud.", "uds.", "pág.",
        # fr
        "m.", "mme.", "mlle.", "etc.",
    }
)

_TOKEN_RE = re.compile(
    r"""
    \.{3,}                                  # pause marker / ellipsis
    | \d+(?:[.,:]\d+)+                      # decimals, times, numbered items
    | \d+                                   # plain digit runs
    | [^\W\d_]+(?:['’\-][^\W\d_]+)*-?       # words, internal '/-, stutter trailing -
    | \S                                    # anything else, one char at a time
    """,
    re.VERBOSE | re.UNICODE,
)

_NAME_MARKUP_RE = re.compile(r"\[NAME\]\(([^)]*)\)")


class TranscriptParseError(ValueError):
    """Raised for malformed transcript markup; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def tokenize(text: str) -> list[str]:
    """Split ``text`` into token surfaces. Empty input yields an empty list."""
    out: list[str] = []
    for chunk in text.split():
        if chunk.lower() in _ABBREVIATIONS:
            out.append(chunk)
        else:
            out.extend(_TOKEN_RE.findall(chunk))
    return out


def _is_pause(surface: str) -> bool:
    return len(surface) >= 3 and set(surface) == {"."}


def parse_transcript(raw: str, doc_id: str, lang: str, role: str = SOURCE) -> TranscriptSide:
    """Parse one-sentence-per-line transcript text into a :class:`TranscriptSide`.

    ``[NAME](...)`` markup is stripped and the enclosed tokens are flagged
    ``is_name``; standalone ``@`` tokens are flagged ``is_hesitation`` and
    ``...`` tokens ``is_pause``. Lines without any token are dropped.

    Raises :class:`TranscriptParseError` on malformed NAME markup.
    """
    tokens: list[Token] = []
    lines: list[tuple[int, int]] = []
    line_index = 0
    for line_no, line in enumerate(raw.splitlines(), start=1):
        pieces = _split_name_markup(line, line_no)
        start = len(tokens)
        for text, is_name in pieces:
            for surface in tokenize(text):
                tokens.append(
                    Token(
                        index=len(tokens),
                        surface=surface,
                        line_index=line_index,
                        is_name=is_name,
                        is_hesitation=surface == "@",
                        is_pause=_is_pause(surface),
                    )
                )
        if len(tokens) > start:
            lines.append((start, len(tokens)))
            line_index += 1
    return TranscriptSide(doc_id=doc_id, lang=lang, role=role, tokens=tuple(tokens), lines=tuple(lines))


def _split_name_markup(line: str, line_no: int) -> list[tuple[str, bool]]:
    """Split a line into ``(text, is_name)`` pieces, validating NAME markup."""
    pieces: list[tuple[str, bool]] = []
    pos = 0
    while True:
        idx = line.find("[NAME]", pos)
        if idx < 0:
            break
        if idx > pos:
            pieces.append((line[pos:idx], False))
        match = _NAME_MARKUP_RE.match(line, idx)
        if match is None:
            raise TranscriptParseError("malformed [NAME](...) markup (missing or unclosed parenthesis)", line_no)
        pieces.append((match.group(1), True))
        pos = match.end()
    if pos < len(line):
        pieces.append((line[pos:], False))
    return pieces
