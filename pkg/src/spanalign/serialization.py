"""Canonical on-disk format for alignment documents.

One UTF-8 JSON document per recording pair, with sorted keys and a fixed
layout so that serializing the same document always produces identical
bytes (diff-friendly storage, cheap change detection).

Schema (all fields required):

    pair_id: str
    meta: {interpreter_id, annotator_id, relay, duration_seconds}
    source / target: {doc_id, lang, lines: [[token, ...], ...],
                      flags: {is_name: [i, ...], is_hesitation: [...], is_pause: [...]}}
    span_links: [{id, label, src: [start, end] | null, tgt: [start, end] | null}]
    word_links: [{src, tgt, strength, parent}]
"""

from __future__ import annotations

import json
from typing import Any

from .model import (
    ONE_SIDED_LABELS,
    SOURCE,
    TARGET,
    AlignmentDocument,
    DocumentMeta,
    Span,
    SpanLabel,
    SpanLink,
    Token,
    TranscriptSide,
    WordLink,
)

UNKNOWN_LABEL = "UNKNOWN_LABEL"
OUT_OF_RANGE = "OUT_OF_RANGE"
DUPLICATE_ID = "DUPLICATE_ID"
BAD_SCHEMA = "BAD_SCHEMA"

_FLAG_NAMES = ("is_name", "is_hesitation", "is_pause")


class SerializationError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def document_to_obj(doc: AlignmentDocument) -> dict[str, Any]:
    return {
        "pair_id": doc.pair_id,
        "meta": {
            "interpreter_id": doc.meta.interpreter_id,
            "annotator_id": doc.meta.annotator_id,
            "relay": doc.meta.relay,
            "duration_seconds": doc.meta.duration_seconds,
        },
        "source": _side_to_obj(doc.source),
        "target": _side_to_obj(doc.target),
        "span_links": [
            {
                "id": link.id,
                "label": link.label.value if link.label is not None else None,
                "src": [link.src.start, link.src.end] if link.src is not None else None,
                "tgt": [link.tgt.start, link.tgt.end] if link.tgt is not None else None,
            }
            for link in doc.span_links
        ],
        "word_links": [
            {"src": wl.src_token, "tgt": wl.tgt_token, "strength": wl.strength, "parent": wl.parent}
            for wl in doc.word_links
        ],
    }


def serialize(doc: AlignmentDocument) -> bytes:
    """Encode a document as canonical UTF-8 JSON bytes (byte-stable)."""
    text = json.dumps(document_to_obj(doc), ensure_ascii=False, sort_keys=True, indent=2)
    return (text + "\n").encode("utf-8")


def deserialize(data: bytes | str) -> AlignmentDocument:
    """Decode and structurally validate canonical bytes.

    Rejects unknown labels, out-of-range indices and duplicate link ids
    with :class:`SerializationError`.
    """
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SerializationError(BAD_SCHEMA, f"not valid JSON: {exc}") from exc
    return document_from_obj(obj)


def document_from_obj(obj: Any) -> AlignmentDocument:
    if not isinstance(obj, dict):
        raise SerializationError(BAD_SCHEMA, "top level must be an object")
    for key in ("pair_id", "meta", "source", "target", "span_links", "word_links"):
        if key not in obj:
            raise SerializationError(BAD_SCHEMA, f"missing field {key!r}")
    source = _side_from_obj(obj["source"], SOURCE)
    target = _side_from_obj(obj["target"], TARGET)
    meta_obj = obj["meta"]
    if not isinstance(meta_obj, dict):
        raise SerializationError(BAD_SCHEMA, "meta must be an object")
    meta = DocumentMeta(
        interpreter_id=meta_obj.get("interpreter_id"),
        annotator_id=meta_obj.get("annotator_id"),
        relay=bool(meta_obj.get("relay", False)),
        duration_seconds=meta_obj.get("duration_seconds"),
    )

    span_links: list[SpanLink] = []
    seen_ids: set[str] = set()
    for entry in obj["span_links"]:
        link = _link_from_obj(entry, len(source), len(target))
        if link.id in seen_ids:
            raise SerializationError(DUPLICATE_ID, f"span link id {link.id!r} appears twice")
        seen_ids.add(link.id)
        span_links.append(link)

    word_links: list[WordLink] = []
    links_by_id = {link.id: link for link in span_links}
    for entry in obj["word_links"]:
        word_links.append(_word_link_from_obj(entry, links_by_id))

    return AlignmentDocument(
        pair_id=str(obj["pair_id"]),
        source=source,
        target=target,
        span_links=tuple(span_links),
        word_links=tuple(word_links),
        meta=meta,
    )


def _side_to_obj(side: TranscriptSide) -> dict[str, Any]:
    lines = [[t.surface for t in side.tokens[s:e]] for s, e in side.lines]
    flags = {name: [t.index for t in side.tokens if getattr(t, name)] for name in _FLAG_NAMES}
    return {"doc_id": side.doc_id, "lang": side.lang, "lines": lines, "flags": flags}


def _side_from_obj(obj: Any, role: str) -> TranscriptSide:
    if not isinstance(obj, dict) or "lines" not in obj:
        raise SerializationError(BAD_SCHEMA, f"{role} side must be an object with 'lines'")
    raw_lines = obj["lines"]
    if not isinstance(raw_lines, list):
        raise SerializationError(BAD_SCHEMA, f"{role} lines must be a list")
    flags_obj = obj.get("flags", {})
    flag_sets = {}
    for name in _FLAG_NAMES:
        indices = flags_obj.get(name, [])
        if not isinstance(indices, list):
            raise SerializationError(BAD_SCHEMA, f"{role} flags.{name} must be a list")
        flag_sets[name] = set(indices)

    tokens: list[Token] = []
    lines: list[tuple[int, int]] = []
    for line in raw_lines:
        if not isinstance(line, list):
            raise SerializationError(BAD_SCHEMA, f"{role} lines entries must be token lists")
        start = len(tokens)
        for surface in line:
            if not isinstance(surface, str) or not surface:
                raise SerializationError(BAD_SCHEMA, f"{role} token {len(tokens)} is not a non-empty string")
            idx = len(tokens)
            tokens.append(
                Token(
                    index=idx,
                    surface=surface,
                    line_index=len(lines),
                    is_name=idx in flag_sets["is_name"],
                    is_hesitation=idx in flag_sets["is_hesitation"],
                    is_pause=idx in flag_sets["is_pause"],
                )
            )
        lines.append((start, len(tokens)))
    n = len(tokens)
    for name, indices in flag_sets.items():
        for idx in indices:
            if not isinstance(idx, int) or not 0 <= idx < n:
                raise SerializationError(OUT_OF_RANGE, f"{role} flags.{name} index {idx!r} out of range")
    return TranscriptSide(
        doc_id=str(obj.get("doc_id", "")),
        lang=str(obj.get("lang", "")),
        role=role,
        tokens=tuple(tokens),
        lines=tuple(lines),
    )


def _span_from_obj(value: Any, side: str, n_tokens: int, link_id: str) -> Span | None:
    if value is None:
        return None
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise SerializationError(BAD_SCHEMA, f"link {link_id}: span must be [start, end] or null")
    start, end = value
    if not 0 <= start < end <= n_tokens:
        raise SerializationError(OUT_OF_RANGE, f"link {link_id}: {side} span [{start},{end}) out of range (0..{n_tokens})")
    return Span(side=side, start=start, end=end)


def _link_from_obj(entry: Any, n_src: int, n_tgt: int) -> SpanLink:
    if not isinstance(entry, dict) or "id" not in entry:
        raise SerializationError(BAD_SCHEMA, "span link entries must be objects with an id")
    link_id = str(entry["id"])
    raw_label = entry.get("label")
    if raw_label is None:
        raise SerializationError(UNKNOWN_LABEL, f"link {link_id}: missing label")
    try:
        label = SpanLabel(raw_label)
    except ValueError:
        raise SerializationError(UNKNOWN_LABEL, f"link {link_id}: unknown label {raw_label!r}") from None
    src = _span_from_obj(entry.get("src"), SOURCE, n_src, link_id)
    tgt = _span_from_obj(entry.get("tgt"), TARGET, n_tgt, link_id)
    if src is None and tgt is None:
        raise SerializationError(BAD_SCHEMA, f"link {link_id}: both sides null")
    if (label in ONE_SIDED_LABELS) != (src is None or tgt is None):
        raise SerializationError(BAD_SCHEMA, f"link {link_id}: label {label} inconsistent with present sides")
    return SpanLink(id=link_id, src=src, tgt=tgt, label=label)


def _word_link_from_obj(entry: Any, links_by_id: dict[str, SpanLink]) -> WordLink:
    if not isinstance(entry, dict):
        raise SerializationError(BAD_SCHEMA, "word link entries must be objects")
    for key in ("src", "tgt", "strength", "parent"):
        if key not in entry:
            raise SerializationError(BAD_SCHEMA, f"word link missing field {key!r}")
    parent_id = str(entry["parent"])
    parent = links_by_id.get(parent_id)
    if parent is None:
        raise SerializationError(OUT_OF_RANGE, f"word link parent {parent_id!r} does not exist")
    if parent.is_one_sided:
        raise SerializationError(BAD_SCHEMA, f"word link parent {parent_id!r} is one-sided")
    src, tgt = entry["src"], entry["tgt"]
    if not (isinstance(src, int) and isinstance(tgt, int)):
        raise SerializationError(BAD_SCHEMA, "word link src/tgt must be token indices")
    if src not in parent.src or tgt not in parent.tgt:
        raise SerializationError(OUT_OF_RANGE, f"word link ({src},{tgt}) outside spans of parent {parent_id!r}")
    strength = entry["strength"]
    if strength not in ("sure", "possible"):
        raise SerializationError(BAD_SCHEMA, f"word link strength {strength!r} invalid")
    return WordLink(src_token=src, tgt_token=tgt, strength=strength, parent=parent_id)
