"""Domain types for span/word-level alignment of transcript pairs.

All types are immutable value objects: operations elsewhere in the package
are pure functions over them, so documents can be shared freely between
threads and worker processes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

SOURCE = "source"
TARGET = "target"
SIDES = (SOURCE, TARGET)

DATASET_LANGS = frozenset({"cs", "en", "de", "es", "fr"})


class SpanLabel(str, enum.Enum):
    """The closed label set for span links.

    ADDF/ADDU mark one-sided spans (content present on a single side);
    every other label requires both a source and a target span.
    """

    TRAN = "TRAN"
    PARA = "PARA"
    SUM = "SUM"
    GEN = "GEN"
    ADDF = "ADDF"
    ADDU = "ADDU"
    REPL = "REPL"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


ONE_SIDED_LABELS = frozenset({SpanLabel.ADDF, SpanLabel.ADDU})
TWO_SIDED_LABELS = frozenset(SpanLabel) - ONE_SIDED_LABELS

#: label -> (category, subcategory, description) for UIs and reports.
LABEL_INFO = {
    SpanLabel.TRAN: ("Translation", None, "Direct translation that holds outside of any additional context."),
    SpanLabel.PARA: ("Reformulation", "Paraphrase", "Equivalent meaning in context, but not a direct translation."),
    SpanLabel.SUM: ("Reformulation", "Summarization", "Equivalent meaning expressed in fewer words."),
    SpanLabel.GEN: ("Reformulation", "Generalization", "Meaning preserved but one side is less specific."),
    SpanLabel.ADDF: ("Addition", "Factual", "One-sided span that changes the information conveyed."),
    SpanLabel.ADDU: ("Addition", "Uninformative", "One-sided span (fillers, repetitions) that does not change the meaning."),
    SpanLabel.REPL: ("Replacement", None, "Obvious error: a number, place or name replaced by another."),
}


@dataclass(frozen=True, slots=True)
class Token:
    """One surface token of a transcript side."""

    index: int
    surface: str
    line_index: int
    is_name: bool = False
    is_hesitation: bool = False
    is_pause: bool = False

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError(f"token {self.index}: empty surface")
        if self.index < 0 or self.line_index < 0:
            raise ValueError(f"token {self.index}: negative index")


@dataclass(frozen=True, slots=True)
class TranscriptSide:
    """One language's token sequence, with the line structure it came from.

    ``lines`` are half-open ``(start, end)`` token-index ranges that
    partition the token sequence in order.
    """

    doc_id: str
    lang: str
    role: str
    tokens: tuple[Token, ...]
    lines: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.role not in SIDES:
            raise ValueError(f"role must be one of {SIDES}, got {self.role!r}")
        pos = 0
        for li, (start, end) in enumerate(self.lines):
            if start != pos or end <= start:
                raise ValueError(f"line {li}: range ({start},{end}) does not continue partition at {pos}")
            pos = end
        if pos != len(self.tokens):
            raise ValueError(f"lines cover {pos} tokens, side has {len(self.tokens)}")
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ValueError(f"token at position {i} carries index {tok.index}")

    def __len__(self) -> int:
        return len(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def line_text(self, line_index: int) -> str:
        start, end = self.lines[line_index]
        return " ".join(t.surface for t in self.tokens[start:end])

    def line_texts(self) -> list[str]:
        return [self.line_text(i) for i in range(len(self.lines))]

    def char_length(self) -> int:
        """Character length of the side, counting single spaces between tokens of a line."""
        return sum(len(self.line_text(i)) for i in range(len(self.lines)))


@dataclass(frozen=True, slots=True)
class Span:
    """Half-open token range ``[start, end)`` on one side."""

    side: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.side not in SIDES:
            raise ValueError(f"span side must be one of {SIDES}, got {self.side!r}")
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span range [{self.start},{self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def __contains__(self, token_index: int) -> bool:
        return self.start <= token_index < self.end


@dataclass(frozen=True, slots=True)
class SpanLink:
    """An aligned pair of spans, or a one-sided span for additions.

    ``label`` may be ``None`` for intermediate pipeline output that has not
    been labeled yet; stored documents always carry a label.
    """

    id: str
    src: Span | None
    tgt: Span | None
    label: SpanLabel | None

    def __post_init__(self) -> None:
        if self.src is not None and self.src.side != SOURCE:
            raise ValueError(f"link {self.id}: src span on side {self.src.side!r}")
        if self.tgt is not None and self.tgt.side != TARGET:
            raise ValueError(f"link {self.id}: tgt span on side {self.tgt.side!r}")
        if self.src is None and self.tgt is None:
            raise ValueError(f"link {self.id}: both sides missing")

    @property
    def is_one_sided(self) -> bool:
        return self.src is None or self.tgt is None


@dataclass(frozen=True, slots=True)
class WordLink:
    """A token-to-token link owned by exactly one span link."""

    src_token: int
    tgt_token: int
    strength: str
    parent: str

    def __post_init__(self) -> None:
        if self.strength not in ("sure", "possible"):
            raise ValueError(f"strength must be 'sure' or 'possible', got {self.strength!r}")
        if self.src_token < 0 or self.tgt_token < 0:
            raise ValueError("word link token indices must be non-negative")


@dataclass(frozen=True, slots=True)
class DocumentMeta:
    interpreter_id: str | None = None
    annotator_id: str | None = None
    relay: bool = False
    duration_seconds: float | None = None


@dataclass(frozen=True, slots=True)
class AlignmentDocument:
    """A recording pair's full annotation state."""

    pair_id: str
    source: TranscriptSide
    target: TranscriptSide
    span_links: tuple[SpanLink, ...] = ()
    word_links: tuple[WordLink, ...] = ()
    meta: DocumentMeta = field(default_factory=DocumentMeta)

    def __post_init__(self) -> None:
        if self.source.role != SOURCE:
            raise ValueError("source side must have role 'source'")
        if self.target.role != TARGET:
            raise ValueError("target side must have role 'target'")

    def side(self, side: str) -> TranscriptSide:
        if side == SOURCE:
            return self.source
        if side == TARGET:
            return self.target
        raise ValueError(f"unknown side {side!r}")

    def link_by_id(self, link_id: str) -> SpanLink | None:
        for link in self.span_links:
            if link.id == link_id:
                return link
        return None

    def side_spans(self, side: str) -> list[Span]:
        """Spans of this document's links on one side, sorted by start."""
        attr = "src" if side == SOURCE else "tgt"
        spans = [getattr(link, attr) for link in self.span_links if getattr(link, attr) is not None]
        return sorted(spans, key=lambda s: (s.start, s.end))

    def with_links(
        self,
        span_links: tuple[SpanLink, ...] | None = None,
        word_links: tuple[WordLink, ...] | None = None,
    ) -> "AlignmentDocument":
        return replace(
            self,
            span_links=self.span_links if span_links is None else tuple(span_links),
            word_links=self.word_links if word_links is None else tuple(word_links),
        )
