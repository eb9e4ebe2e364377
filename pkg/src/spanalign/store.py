"""On-disk document store with revisioned, validated edits.

Storage is a directory of canonical alignment files plus a ``manifest.json``
mapping pair ids to files and revisions; no database. Writes go through a
temp-file-then-rename so a crash mid-write never leaves a corrupt store.
Edits use optimistic concurrency: each carries the revision it was made
against and is rejected with a conflict when the document moved on.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable

from .model import (
    AlignmentDocument,
    Span,
    SpanLabel,
    SpanLink,
    WordLink,
)
from .serialization import SerializationError, deserialize, serialize
from .tokenizer import TranscriptParseError, parse_transcript
from .validation import ValidationReport, validate_document

EDIT_KINDS = (
    "create_span_link",
    "delete_span_link",
    "relabel_link",
    "create_word_link",
    "delete_word_link",
    "set_strength",
)


@dataclass(frozen=True, slots=True)
class Edit:
    kind: str
    payload: dict
    client_revision: int


@dataclass(frozen=True, slots=True)
class StoredDocument:
    doc: AlignmentDocument
    revision: int
    updated_at: str


class EditConflict(Exception):
    def __init__(self, expected: int, got: int):
        super().__init__(f"CONFLICT: document is at revision {expected}, edit was made against {got}")
        self.current_revision = expected


class EditRejected(Exception):
    def __init__(self, message: str, report: ValidationReport | None = None):
        super().__init__(f"REJECTED: {message}")
        self.report = report or ValidationReport()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def apply_edit(stored: StoredDocument, edit: Edit) -> StoredDocument:
    """Apply one edit, returning the next revision.

    Raises :class:`EditConflict` on a stale ``client_revision`` and
    :class:`EditRejected` when the edited document would violate a hard
    invariant (incompleteness is fine; annotation is incremental).
    """
    if edit.client_revision != stored.revision:
        raise EditConflict(stored.revision, edit.client_revision)
    try:
        doc = _apply(stored.doc, edit.kind, edit.payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise EditRejected(str(exc)) from exc
    report = validate_document(doc)
    if not report.ok:
        raise EditRejected("edit violates annotation invariants", report)
    return StoredDocument(doc=doc, revision=stored.revision + 1, updated_at=_now())


def _apply(doc: AlignmentDocument, kind: str, payload: dict) -> AlignmentDocument:
    if kind == "create_span_link":
        link_id = str(payload.get("id") or _fresh_link_id(doc))
        label = SpanLabel(payload["label"])
        src = _span_from_payload(payload.get("src"), "source")
        tgt = _span_from_payload(payload.get("tgt"), "target")
        link = SpanLink(id=link_id, src=src, tgt=tgt, label=label)
        return doc.with_links(span_links=doc.span_links + (link,))
    if kind == "delete_span_link":
        link_id = str(payload["id"])
        if doc.link_by_id(link_id) is None:
            raise ValueError(f"no span link {link_id!r}")
        return doc.with_links(
            span_links=tuple(l for l in doc.span_links if l.id != link_id),
            word_links=tuple(w for w in doc.word_links if w.parent != link_id),
        )
    if kind == "relabel_link":
        link_id = str(payload["id"])
        label = SpanLabel(payload["label"])
        if doc.link_by_id(link_id) is None:
            raise ValueError(f"no span link {link_id!r}")
        return doc.with_links(
            span_links=tuple(replace(l, label=label) if l.id == link_id else l for l in doc.span_links)
        )
    if kind == "create_word_link":
        wl = WordLink(int(payload["src"]), int(payload["tgt"]), payload.get("strength", "sure"), str(payload["parent"]))
        if any(w.src_token == wl.src_token and w.tgt_token == wl.tgt_token and w.parent == wl.parent for w in doc.word_links):
            raise ValueError("word link already exists")
        return doc.with_links(word_links=doc.word_links + (wl,))
    if kind in ("delete_word_link", "set_strength"):
        src, tgt, parent = int(payload["src"]), int(payload["tgt"]), str(payload["parent"])
        matches = [w for w in doc.word_links if w.src_token == src and w.tgt_token == tgt and w.parent == parent]
        if not matches:
            raise ValueError(f"no word link ({src},{tgt}) under {parent!r}")
        if kind == "delete_word_link":
            rest = tuple(w for w in doc.word_links if w not in matches)
            return doc.with_links(word_links=rest)
        strength = payload["strength"]
        return doc.with_links(
            word_links=tuple(replace(w, strength=strength) if w in matches else w for w in doc.word_links)
        )
    raise ValueError(f"unknown edit kind {kind!r}")


def _span_from_payload(value: Any, side: str) -> Span | None:
    if value is None:
        return None
    start, end = int(value[0]), int(value[1])
    return Span(side, start, end)


def _fresh_link_id(doc: AlignmentDocument) -> str:
    used = {l.id for l in doc.span_links}
    n = len(used)
    while f"L{n}" in used:
        n += 1
    return f"L{n}"


# ---------------------------------------------------------------------------
# persistence

class DocumentStore:
    """Directory-backed store; one canonical file per document."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._manifest_path = self.root / "manifest.json"
        self._manifest: dict[str, dict] = {}
        if self._manifest_path.exists():
            self._manifest = json.loads(self._manifest_path.read_text(encoding="utf-8"))

    def ids(self) -> list[str]:
        return sorted(self._manifest)

    def entries(self) -> list[dict]:
        return [
            {"pair_id": pair_id, "revision": entry["revision"], "updated_at": entry["updated_at"]}
            for pair_id, entry in sorted(self._manifest.items())
        ]

    def get(self, pair_id: str) -> StoredDocument:
        entry = self._manifest.get(pair_id)
        if entry is None:
            raise KeyError(pair_id)
        doc = deserialize((self.root / entry["file"]).read_bytes())
        return StoredDocument(doc=doc, revision=entry["revision"], updated_at=entry["updated_at"])

    def put(self, doc: AlignmentDocument, revision: int = 0) -> StoredDocument:
        stored = StoredDocument(doc=doc, revision=revision, updated_at=_now())
        with self._lock(doc.pair_id):
            self._write(stored)
        return stored

    def apply(self, pair_id: str, edit: Edit) -> StoredDocument:
        """Serialize edits per document; exactly one of two conflicting
        concurrent edits is accepted."""
        with self._lock(pair_id):
            stored = self.get(pair_id)
            updated = apply_edit(stored, edit)
            self._write(updated)
            return updated

    def _lock(self, pair_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(pair_id, threading.Lock())

    def _write(self, stored: StoredDocument) -> None:
        filename = _safe_filename(stored.doc.pair_id)
        _atomic_write(self.root / filename, serialize(stored.doc))
        self._manifest[stored.doc.pair_id] = {
            "file": filename,
            "revision": stored.revision,
            "updated_at": stored.updated_at,
        }
        payload = json.dumps(self._manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
        _atomic_write(self._manifest_path, payload.encode("utf-8"))


def _safe_filename(pair_id: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in pair_id)
    return f"{safe}.align.json"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# dataset import

@dataclass(frozen=True, slots=True)
class ImportedPair:
    pair_id: str
    src_lang: str
    tgt_lang: str
    src_tokens: int
    tgt_tokens: int
    duration_seconds: float | None
    complete: bool


@dataclass(frozen=True, slots=True)
class ImportSummary:
    imported: tuple[ImportedPair, ...]
    skipped: tuple[tuple[str, str], ...]  # (path, reason)

    def by_language_pair(self) -> dict[tuple[str, str], dict[str, float]]:
        groups: dict[tuple[str, str], dict[str, float]] = {}
        for pair in self.imported:
            key = (pair.src_lang, pair.tgt_lang)
            row = groups.setdefault(key, {"count": 0, "duration": 0.0, "src_tokens": 0, "tgt_tokens": 0})
            row["count"] += 1
            row["duration"] += pair.duration_seconds or 0.0
            row["src_tokens"] += pair.src_tokens
            row["tgt_tokens"] += pair.tgt_tokens
        return dict(sorted(groups.items()))

    def total_duration(self) -> float:
        return sum(p.duration_seconds or 0.0 for p in self.imported)


def import_dataset(path: str | Path, store: DocumentStore) -> ImportSummary:
    """Register every alignment file and transcript pair under ``path``.

    Alignment files are ``*.align.json`` in the canonical format; raw
    transcript pairs are ``<pair>.source.<lang>.txt`` plus
    ``<pair>.target.<lang>.txt`` and import as link-less documents.
    Malformed files are skipped and reported in the summary.
    """
    root = Path(path)
    imported: list[ImportedPair] = []
    skipped: list[tuple[str, str]] = []

    for file in sorted(root.rglob("*.align.json")):
        try:
            doc = deserialize(file.read_bytes())
            report = validate_document(doc)
            if not report.ok:
                raise SerializationError("INVALID", f"validation errors: {sorted(report.codes())}")
        except (SerializationError, OSError) as exc:
            skipped.append((str(file), str(exc)))
            continue
        store.put(doc, revision=0)
        imported.append(_pair_row(doc, validate_document(doc).is_complete))

    for src_file in sorted(root.rglob("*.source.*.txt")):
        name = src_file.name
        pair_id, _, rest = name.partition(".source.")
        src_lang = rest[: -len(".txt")]
        candidates = sorted(src_file.parent.glob(f"{pair_id}.target.*.txt"))
        if not candidates:
            skipped.append((str(src_file), "no matching target transcript"))
            continue
        tgt_file = candidates[0]
        tgt_lang = tgt_file.name[len(f"{pair_id}.target.") : -len(".txt")]
        try:
            source = parse_transcript(src_file.read_text(encoding="utf-8"), doc_id=f"{pair_id}-src", lang=src_lang, role="source")
            target = parse_transcript(tgt_file.read_text(encoding="utf-8"), doc_id=f"{pair_id}-tgt", lang=tgt_lang, role="target")
        except (TranscriptParseError, OSError) as exc:
            skipped.append((str(src_file), str(exc)))
            continue
        doc = AlignmentDocument(pair_id=pair_id, source=source, target=target)
        store.put(doc, revision=0)
        imported.append(_pair_row(doc, complete=False))

    return ImportSummary(imported=tuple(imported), skipped=tuple(skipped))


def _pair_row(doc: AlignmentDocument, complete: bool) -> ImportedPair:
    return ImportedPair(
        pair_id=doc.pair_id,
        src_lang=doc.source.lang,
        tgt_lang=doc.target.lang,
        src_tokens=len(doc.source),
        tgt_tokens=len(doc.target),
        duration_seconds=doc.meta.duration_seconds,
        complete=complete,
    )


def format_import_summary(summary: ImportSummary) -> str:
    lines = []
    lines.append(f"imported {len(summary.imported)} recording(s), total duration {_hms(summary.total_duration())}")
    lines.append(f"{'src':>4} {'trg':>4} {'count':>6} {'duration':>10} {'src tok':>9} {'trg tok':>9}")
    for (src, tgt), row in summary.by_language_pair().items():
        lines.append(
            f"{src:>4} {tgt:>4} {int(row['count']):>6} {_hms(row['duration']):>10} {int(row['src_tokens']):>9} {int(row['tgt_tokens']):>9}"
        )
    for path, reason in summary.skipped:
        lines.append(f"skipped {path}: {reason}")
    return "\n".join(lines)


def _hms(seconds: float) -> str:
    total = int(round(seconds))
    return f"{total // 3600:02d}:{total % 3600 // 60:02d}:{total % 60:02d}"


def load_documents(paths: Iterable[str | Path]) -> list[AlignmentDocument]:
    """Read canonical alignment files; directories are searched recursively."""
    docs = []
    for raw in paths:
        p = Path(raw)
        files = sorted(p.rglob("*.align.json")) if p.is_dir() else [p]
        for file in files:
            docs.append(deserialize(file.read_bytes()))
    return docs
