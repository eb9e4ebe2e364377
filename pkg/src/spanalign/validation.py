"""Document validation: every annotation-guideline invariant as a reported error.

Validation never raises on bad annotation data; violations come back as
:class:`ValidationError` entries so that services and UIs can show them.
Incompleteness (uncovered tokens) is not an error, only ``is_complete=False``:
work-in-progress documents are first-class.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ONE_SIDED_LABELS,
    SIDES,
    SOURCE,
    TARGET,
    AlignmentDocument,
)

# error codes
OVERLAPPING_SPANS = "OVERLAPPING_SPANS"
SPAN_OUT_OF_RANGE = "SPAN_OUT_OF_RANGE"
LABEL_SIDES_MISMATCH = "LABEL_SIDES_MISMATCH"
MISSING_LABEL = "MISSING_LABEL"
DUPLICATE_LINK_ID = "DUPLICATE_LINK_ID"
WORD_LINK_UNKNOWN_PARENT = "WORD_LINK_UNKNOWN_PARENT"
WORD_LINK_PARENT_ONE_SIDED = "WORD_LINK_PARENT_ONE_SIDED"
WORD_LINK_CROSSES_SPANS = "WORD_LINK_CROSSES_SPANS"
WORD_LINK_OUTSIDE_SPAN = "WORD_LINK_OUTSIDE_SPAN"
WORD_LINK_OUT_OF_RANGE = "WORD_LINK_OUT_OF_RANGE"


@dataclass(frozen=True, slots=True)
class ValidationError:
    code: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class ValidationReport:
    errors: tuple[ValidationError, ...] = ()
    is_complete: bool = False

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> set[str]:
        return {e.code for e in self.errors}


def validate_document(doc: AlignmentDocument) -> ValidationReport:
    """Check every document invariant; pure and deterministic.

    Returns a report listing all violations. ``is_complete`` is true iff
    every token on both sides is covered by exactly one span.
    """
    errors: list[ValidationError] = []
    _check_link_ids(doc, errors)
    _check_label_sides(doc, errors)
    span_ok = _check_spans(doc, errors)
    _check_word_links(doc, errors)
    is_complete = span_ok and _fully_covered(doc)
    return ValidationReport(errors=tuple(errors), is_complete=is_complete)


def _check_link_ids(doc: AlignmentDocument, errors: list[ValidationError]) -> None:
    seen: set[str] = set()
    for link in doc.span_links:
        if link.id in seen:
            errors.append(ValidationError(DUPLICATE_LINK_ID, f"span link id {link.id!r} used more than once", (link.id,)))
        seen.add(link.id)


def _check_label_sides(doc: AlignmentDocument, errors: list[ValidationError]) -> None:
    for link in doc.span_links:
        if link.label is None:
            errors.append(ValidationError(MISSING_LABEL, f"link {link.id} has no label", (link.id,)))
        elif (link.label in ONE_SIDED_LABELS) != link.is_one_sided:
            if link.label in ONE_SIDED_LABELS:
                msg = f"link {link.id}: addition label {link.label} requires exactly one side"
            else:
                msg = f"link {link.id}: label {link.label} requires both sides"
            errors.append(ValidationError(LABEL_SIDES_MISMATCH, msg, (link.id,)))


def _check_spans(doc: AlignmentDocument, errors: list[ValidationError]) -> bool:
    """Range and overlap checks per side. Returns True when all spans are clean."""
    ok = True
    for side in SIDES:
        n = len(doc.side(side))
        attr = "src" if side == SOURCE else "tgt"
        placed: list[tuple[int, int, str]] = []
        for link in doc.span_links:
            span = getattr(link, attr)
            if span is None:
                continue
            if span.end > n:
                errors.append(
                    ValidationError(SPAN_OUT_OF_RANGE, f"link {link.id}: {side} span [{span.start},{span.end}) exceeds {n} tokens", (link.id,))
                )
                ok = False
                continue
            placed.append((span.start, span.end, link.id))
        placed.sort()
        for (s1, e1, id1), (s2, e2, id2) in zip(placed, placed[1:]):
            if s2 < e1:
                errors.append(
                    ValidationError(OVERLAPPING_SPANS, f"{side} spans of links {id1} and {id2} overlap", (id1, id2))
                )
                ok = False
    return ok


def _check_word_links(doc: AlignmentDocument, errors: list[ValidationError]) -> None:
    links_by_id = {link.id: link for link in doc.span_links}
    src_cover = _covering_links(doc, SOURCE)
    tgt_cover = _covering_links(doc, TARGET)
    for wl in doc.word_links:
        parent = links_by_id.get(wl.parent)
        if parent is None:
            errors.append(
                ValidationError(WORD_LINK_UNKNOWN_PARENT, f"word link ({wl.src_token},{wl.tgt_token}) names unknown parent {wl.parent!r}", (wl.parent,))
            )
            continue
        if parent.is_one_sided:
            errors.append(
                ValidationError(WORD_LINK_PARENT_ONE_SIDED, f"word link ({wl.src_token},{wl.tgt_token}) attached to one-sided link {parent.id}", (parent.id,))
            )
            continue
        if wl.src_token >= len(doc.source) or wl.tgt_token >= len(doc.target):
            errors.append(
                ValidationError(WORD_LINK_OUT_OF_RANGE, f"word link ({wl.src_token},{wl.tgt_token}) outside the token sequences", (parent.id,))
            )
            continue
        src_ok = wl.src_token in parent.src
        tgt_ok = wl.tgt_token in parent.tgt
        if src_ok and tgt_ok:
            continue
        other = src_cover.get(wl.src_token) if not src_ok else tgt_cover.get(wl.tgt_token)
        if other is not None and other != parent.id:
            errors.append(
                ValidationError(
                    WORD_LINK_CROSSES_SPANS,
                    f"word link ({wl.src_token},{wl.tgt_token}) has endpoints in different span links ({parent.id}, {other})",
                    (parent.id, other),
                )
            )
        else:
            errors.append(
                ValidationError(
                    WORD_LINK_OUTSIDE_SPAN,
                    f"word link ({wl.src_token},{wl.tgt_token}) endpoint outside the spans of its parent {parent.id}",
                    (parent.id,),
                )
            )


def _covering_links(doc: AlignmentDocument, side: str) -> dict[int, str]:
    """token index -> id of the link whose span covers it (last wins on overlap)."""
    attr = "src" if side == SOURCE else "tgt"
    n = len(doc.side(side))
    cover: dict[int, str] = {}
    for link in doc.span_links:
        span = getattr(link, attr)
        if span is None or span.end > n:
            continue
        for t in range(span.start, span.end):
            cover[t] = link.id
    return cover


def _fully_covered(doc: AlignmentDocument) -> bool:
    for side in SIDES:
        n = len(doc.side(side))
        counts = [0] * n
        attr = "src" if side == SOURCE else "tgt"
        for link in doc.span_links:
            span = getattr(link, attr)
            if span is None:
                continue
            for t in range(span.start, span.end):
                counts[t] += 1
        if any(c != 1 for c in counts):
            return False
    return True
