"""Corpus statistics over annotated documents: label distributions, span
length summaries, weighted length ratios, and direct/relay and multi-track
comparisons.

All reports are deterministic and invariant to document ordering; character
lengths count single spaces between the tokens of a line.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .model import (
    ONE_SIDED_LABELS,
    SIDES,
    SOURCE,
    TARGET,
    AlignmentDocument,
    SpanLabel,
)
from .validation import validate_document

log = logging.getLogger(__name__)


class AnalysisError(ValueError):
    pass


def _require_complete(docs: Sequence[AlignmentDocument]) -> None:
    for doc in docs:
        report = validate_document(doc)
        if not report.ok or not report.is_complete:
            raise AnalysisError(f"document {doc.pair_id} is not a complete valid annotation")


@dataclass(frozen=True, slots=True)
class LabelDistribution:
    """Per side, the percentage of tokens under each label (sums to 100)."""

    source: Mapping[str, float]
    target: Mapping[str, float]

    def side(self, side: str) -> Mapping[str, float]:
        return self.source if side == SOURCE else self.target


def token_label_distribution(docs: Sequence[AlignmentDocument]) -> LabelDistribution:
    _require_complete(docs)
    counts = {side: defaultdict(int) for side in SIDES}
    totals = {side: 0 for side in SIDES}
    for doc in docs:
        for side, attr in ((SOURCE, "src"), (TARGET, "tgt")):
            totals[side] += len(doc.side(side))
            for link in doc.span_links:
                span = getattr(link, attr)
                if span is not None:
                    counts[side][link.label.value] += len(span)
    if totals[SOURCE] == 0 or totals[TARGET] == 0:
        raise AnalysisError("no tokens to report on")
    return LabelDistribution(
        source={label: 100.0 * count / totals[SOURCE] for label, count in sorted(counts[SOURCE].items())},
        target={label: 100.0 * count / totals[TARGET] for label, count in sorted(counts[TARGET].items())},
    )


def weighted_length_ratio(docs: Sequence[AlignmentDocument]) -> dict[str, float]:
    """Per label, the source-length-weighted mean of target/source span
    length ratios, which reduces to sum(tgt)/sum(src). Addition labels are
    excluded (no counterpart side); labels without links are omitted."""
    src_total = defaultdict(int)
    tgt_total = defaultdict(int)
    for doc in docs:
        for link in doc.span_links:
            if link.label is None or link.label in ONE_SIDED_LABELS or link.is_one_sided:
                continue
            src_total[link.label.value] += len(link.src)
            tgt_total[link.label.value] += len(link.tgt)
    return {label: tgt_total[label] / src_total[label] for label in sorted(src_total) if src_total[label] > 0}


@dataclass(frozen=True, slots=True)
class LengthSummary:
    count: int
    mean: float
    q1: float
    median: float
    q3: float


def span_length_distribution(
    docs: Sequence[AlignmentDocument],
    group_by: str = "label",
) -> dict[str, LengthSummary]:
    """Token-length samples of all spans, grouped by label or annotator.

    Quartiles use linear interpolation. Raises when grouping by annotator
    and a document lacks an annotator id.
    """
    if group_by not in ("label", "annotator"):
        raise AnalysisError(f"unknown group key {group_by!r}")
    samples: dict[str, list[int]] = defaultdict(list)
    for doc in docs:
        if group_by == "annotator":
            if not doc.meta.annotator_id:
                raise AnalysisError(f"document {doc.pair_id} lacks an annotator id")
            key = doc.meta.annotator_id
        for link in doc.span_links:
            if group_by == "label":
                key = link.label.value if link.label is not None else "?"
            for span in (link.src, link.tgt):
                if span is not None:
                    samples[key].append(len(span))
    out: dict[str, LengthSummary] = {}
    for key in sorted(samples):
        values = np.asarray(samples[key], dtype=np.float64)
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        out[key] = LengthSummary(count=len(values), mean=float(values.mean()), q1=float(q1), median=float(median), q3=float(q3))
    return out


def span_length_samples(docs: Sequence[AlignmentDocument]) -> list[tuple[str, str, int]]:
    """Plot-ready rows (label, side, span length in tokens)."""
    rows: list[tuple[str, str, int]] = []
    for doc in docs:
        for link in doc.span_links:
            label = link.label.value if link.label is not None else "?"
            if link.src is not None:
                rows.append((label, SOURCE, len(link.src)))
            if link.tgt is not None:
                rows.append((label, TARGET, len(link.tgt)))
    return sorted(rows)


@dataclass(frozen=True, slots=True)
class MultiTrackRow:
    source_doc_id: str
    first_doc_id: str
    second_doc_id: str
    char_ratio: float
    token_ratio: float


@dataclass(frozen=True, slots=True)
class ComparativeReport:
    direct_char_ratio: float | None
    relay_char_ratio: float | None
    label_share_by_relay: Mapping[bool, Mapping[str, float]]
    multi_track: tuple[MultiTrackRow, ...]
    warnings: tuple[str, ...] = field(default=())


def comparative_reports(docs: Sequence[AlignmentDocument]) -> ComparativeReport:
    """Direct-vs-relay character-length ratios and label shares, plus the
    multi-track pairs (same source document interpreted twice into the same
    language) and their length ratios."""
    warnings: list[str] = []
    ratios: dict[bool, list[float]] = {False: [], True: []}
    label_tokens: dict[bool, dict[str, int]] = {False: defaultdict(int), True: defaultdict(int)}
    for doc in docs:
        src_chars = doc.source.char_length()
        if src_chars == 0:
            warnings.append(f"{doc.pair_id}: empty source side skipped in ratio report")
            continue
        ratios[doc.meta.relay].append(doc.target.char_length() / src_chars)
        for link in doc.span_links:
            if link.label is None:
                continue
            for span in (link.src, link.tgt):
                if span is not None:
                    label_tokens[doc.meta.relay][link.label.value] += len(span)

    def mean_or_none(values: list[float]) -> float | None:
        return sum(values) / len(values) if values else None

    shares: dict[bool, dict[str, float]] = {}
    for relay, counts in label_tokens.items():
        total = sum(counts.values())
        shares[relay] = {label: 100.0 * c / total for label, c in sorted(counts.items())} if total else {}

    groups: dict[tuple[str, str], list[AlignmentDocument]] = defaultdict(list)
    for doc in docs:
        groups[(doc.source.doc_id, doc.target.lang)].append(doc)
    multi_track: list[MultiTrackRow] = []
    for (src_id, _lang), members in sorted(groups.items()):
        if len(members) < 2:
            continue
        members = sorted(members, key=lambda d: d.target.doc_id)
        for first, second in combinations(members, 2):
            c1, c2 = first.target.char_length(), second.target.char_length()
            t1, t2 = len(first.target), len(second.target)
            if c2 == 0 or t2 == 0:
                warnings.append(f"multi-track pair ({first.target.doc_id},{second.target.doc_id}): empty side skipped")
                continue
            multi_track.append(
                MultiTrackRow(
                    source_doc_id=src_id,
                    first_doc_id=first.target.doc_id,
                    second_doc_id=second.target.doc_id,
                    char_ratio=c1 / c2,
                    token_ratio=t1 / t2,
                )
            )
    for msg in warnings:
        log.warning("%s", msg)
    return ComparativeReport(
        direct_char_ratio=mean_or_none(ratios[False]),
        relay_char_ratio=mean_or_none(ratios[True]),
        label_share_by_relay=shares,
        multi_track=tuple(multi_track),
        warnings=tuple(warnings),
    )
