"""Evaluation metrics for segmentation, span alignment, word alignment and labels,
plus Cohen's kappa for inter-annotator agreement.

All functions are pure; corpus-level scores are macro-averages over
recordings and can be aggregated in any order.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .model import SOURCE, TARGET, AlignmentDocument, Span, SpanLabel, SpanLink
from .validation import validate_document

log = logging.getLogger(__name__)

INCOMPLETE_ANNOTATION = "INCOMPLETE_ANNOTATION"


class MetricError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SegmentationScore:
    accuracy: float
    precision: float
    recall: float
    f1: float
    pk: float
    window_diff: float
    k: int


@dataclass(frozen=True, slots=True)
class SpanAlignScore:
    exact_with_labels: float  # percentage 0..100
    exact_without_labels: float  # percentage 0..100
    relaxed_precision: float
    relaxed_recall: float
    relaxed_f1: float


@dataclass(frozen=True, slots=True)
class WordAlignScore:
    aer: float
    precision: float
    recall: float | None  # None when the sure set is empty (undefined)
    f1: float | None


@dataclass(frozen=True, slots=True)
class LabelScore:
    accuracy: float
    macro_f1: float
    per_label_f1: Mapping[str, float]


@dataclass(frozen=True, slots=True)
class KappaScore:
    kappa: float
    observed_agreement: float
    expected_agreement: float


def _f1(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# segmentation

def boundary_string(spans: Sequence[Span] | Sequence[tuple[int, int]], n_tokens: int) -> list[int]:
    """Binary gap vector of length ``n_tokens - 1``: bit g is 1 iff a span
    boundary follows token g."""
    if n_tokens < 1:
        return []
    bits = [0] * (n_tokens - 1)
    for span in spans:
        start, end = (span.start, span.end) if isinstance(span, Span) else span
        for edge in (start, end):
            if 0 < edge < n_tokens:
                bits[edge - 1] = 1
    return bits


def default_window_size(n_tokens: int, ref_span_count: int) -> int:
    """Half the mean reference span length in tokens, at least 2, below n."""
    if ref_span_count < 1:
        raise MetricError("reference has no spans; cannot derive a window size")
    k = max(2, int(n_tokens / (2 * ref_span_count) + 0.5))
    return min(k, n_tokens - 1)


def evaluate_segmentation(
    ref_spans: Sequence[Span] | Sequence[tuple[int, int]],
    hyp_spans: Sequence[Span] | Sequence[tuple[int, int]],
    n_tokens: int,
    k: int | None = None,
) -> SegmentationScore:
    """Boundary accuracy/P/R/F1 plus the sliding-window error probabilities.

    Pk slides a window of ``k`` tokens and counts positions where reference
    and hypothesis disagree on whether the window's two end tokens share a
    span; WindowDiff counts positions where the number of boundaries inside
    the window differs. ``k`` defaults to half the mean reference span
    length (clamped to ``[2, n_tokens - 1]``).
    """
    if n_tokens < 2:
        raise MetricError(f"need at least 2 tokens, got {n_tokens}")
    ref_bits = boundary_string(ref_spans, n_tokens)
    hyp_bits = boundary_string(hyp_spans, n_tokens)
    if k is None:
        k = default_window_size(n_tokens, len(ref_spans))
    if k >= n_tokens:
        raise MetricError(f"window size k={k} must be smaller than the token count {n_tokens}")
    if k < 1:
        raise MetricError(f"window size k={k} must be positive")

    tp = sum(1 for r, h in zip(ref_bits, hyp_bits) if r == 1 and h == 1)
    fp = sum(1 for r, h in zip(ref_bits, hyp_bits) if r == 0 and h == 1)
    fn = sum(1 for r, h in zip(ref_bits, hyp_bits) if r == 1 and h == 0)
    gaps = len(ref_bits)
    accuracy = sum(1 for r, h in zip(ref_bits, hyp_bits) if r == h) / gaps
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0

    windows = n_tokens - k
    pk_err = 0
    wd_err = 0
    ref_prefix = _prefix_sums(ref_bits)
    hyp_prefix = _prefix_sums(hyp_bits)
    for i in range(windows):
        # boundaries in gaps i .. i+k-1 decide whether tokens i and i+k share a span
        rc = ref_prefix[i + k] - ref_prefix[i]
        hc = hyp_prefix[i + k] - hyp_prefix[i]
        if (rc == 0) != (hc == 0):
            pk_err += 1
        if rc != hc:
            wd_err += 1
    return SegmentationScore(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        pk=pk_err / windows,
        window_diff=wd_err / windows,
        k=k,
    )


def _prefix_sums(bits: Sequence[int]) -> list[int]:
    out = [0]
    for b in bits:
        out.append(out[-1] + b)
    return out


# ---------------------------------------------------------------------------
# span alignment

def _link_key(link: SpanLink, with_label: bool) -> tuple:
    src = (link.src.start, link.src.end) if link.src is not None else None
    tgt = (link.tgt.start, link.tgt.end) if link.tgt is not None else None
    return (src, tgt, link.label) if with_label else (src, tgt)


def _pair_set(links: Iterable[SpanLink]) -> set[tuple[int, int]]:
    pairs: set[tuple[int, int]] = set()
    for link in links:
        if link.src is None or link.tgt is None:
            continue
        for u in range(link.src.start, link.src.end):
            for v in range(link.tgt.start, link.tgt.end):
                pairs.add((u, v))
    return pairs


def evaluate_span_alignment(ref: Sequence[SpanLink], hyp: Sequence[SpanLink]) -> SpanAlignScore:
    """Exact-match percentages (with/without labels) and the relaxed
    precision/recall/F1 over all within-link token pairs.

    One-sided (addition) links count in the exact-match denominator but
    contribute no pairs to the relaxed sets.
    """
    if not ref:
        raise MetricError("exact match undefined for an empty reference link set")
    hyp_with = {_link_key(h, True) for h in hyp}
    hyp_without = {_link_key(h, False) for h in hyp}
    exact_with = sum(1 for r in ref if _link_key(r, True) in hyp_with) / len(ref)
    exact_without = sum(1 for r in ref if _link_key(r, False) in hyp_without) / len(ref)

    ref_pairs = _pair_set(ref)
    hyp_pairs = _pair_set(hyp)
    common = len(ref_pairs & hyp_pairs)
    precision = common / len(hyp_pairs) if hyp_pairs else 0.0
    recall = common / len(ref_pairs) if ref_pairs else 0.0
    return SpanAlignScore(
        exact_with_labels=100.0 * exact_with,
        exact_without_labels=100.0 * exact_without,
        relaxed_precision=precision,
        relaxed_recall=recall,
        relaxed_f1=_f1(precision, recall),
    )


# ---------------------------------------------------------------------------
# word alignment

def evaluate_word_alignment(
    pred: set[tuple[int, int]],
    sure: set[tuple[int, int]],
    possible: set[tuple[int, int]],
) -> WordAlignScore:
    """Alignment error rate and P/R/F1 of predicted links against the
    sure/possible reference sets (``possible`` is taken as a superset of
    ``sure``; the union is applied defensively).

    With an empty sure set, recall and F1 are undefined and returned as
    ``None``; :func:`macro_word_alignment` excludes such recordings.
    """
    possible = possible | sure
    if not pred and not sure:
        return WordAlignScore(aer=0.0, precision=1.0, recall=1.0, f1=1.0)
    hits_sure = len(pred & sure)
    hits_possible = len(pred & possible)
    aer = 1.0 - (hits_sure + hits_possible) / (len(pred) + len(sure))
    precision = hits_possible / len(pred) if pred else 1.0
    if not sure:
        return WordAlignScore(aer=aer, precision=precision, recall=None, f1=None)
    recall = hits_sure / len(sure)
    return WordAlignScore(aer=aer, precision=precision, recall=recall, f1=_f1(precision, recall))


def macro_word_alignment(scores: Sequence[WordAlignScore]) -> WordAlignScore:
    """Unweighted mean over recordings; recordings with undefined recall are
    excluded from the recall/F1 means (logged)."""
    if not scores:
        raise MetricError("no word-alignment scores to aggregate")
    defined = [s for s in scores if s.recall is not None]
    if len(defined) < len(scores):
        log.warning(
            "excluding %d recording(s) with empty sure sets from the recall/F1 macro-average",
            len(scores) - len(defined),
        )
    aer = sum(s.aer for s in scores) / len(scores)
    precision = sum(s.precision for s in scores) / len(scores)
    if not defined:
        return WordAlignScore(aer=aer, precision=precision, recall=None, f1=None)
    recall = sum(s.recall for s in defined) / len(defined)
    f1 = sum(s.f1 for s in defined) / len(defined)
    return WordAlignScore(aer=aer, precision=precision, recall=recall, f1=f1)


def word_link_sets(doc: AlignmentDocument) -> tuple[set[tuple[int, int]], set[tuple[int, int]]]:
    """(sure, possible) reference pair sets of a document; possible ⊇ sure."""
    sure = {(wl.src_token, wl.tgt_token) for wl in doc.word_links if wl.strength == "sure"}
    possible = {(wl.src_token, wl.tgt_token) for wl in doc.word_links}
    return sure, possible


# ---------------------------------------------------------------------------
# label match

def token_labels(doc: AlignmentDocument) -> list[SpanLabel]:
    """Per-token labels (source side then target side), each token inheriting
    the label of the span link that covers it. Requires a complete document."""
    report = validate_document(doc)
    if not report.is_complete or not report.ok:
        raise MetricError(f"{INCOMPLETE_ANNOTATION}: document {doc.pair_id} is not a complete valid annotation")
    out: list[SpanLabel] = []
    for side, attr in ((SOURCE, "src"), (TARGET, "tgt")):
        n = len(doc.side(side))
        labels: list[SpanLabel | None] = [None] * n
        for link in doc.span_links:
            span = getattr(link, attr)
            if span is None:
                continue
            for t in range(span.start, span.end):
                labels[t] = link.label
        out.extend(labels)  # completeness guarantees no None survives
    return out


def evaluate_labels(ref: AlignmentDocument, hyp: AlignmentDocument) -> LabelScore:
    """Token-level label accuracy and macro F1 over the labels present in the
    reference (macro-averaging is a documented choice; reports flag it)."""
    ref_labels = token_labels(ref)
    hyp_labels = token_labels(hyp)
    if len(ref_labels) != len(hyp_labels):
        raise MetricError("reference and hypothesis cover different token counts")
    n = len(ref_labels)
    if n == 0:
        raise MetricError("empty documents")
    accuracy = sum(1 for r, h in zip(ref_labels, hyp_labels) if r == h) / n

    per_label: dict[str, float] = {}
    for label in sorted({l for l in ref_labels}, key=lambda l: l.value):
        tp = sum(1 for r, h in zip(ref_labels, hyp_labels) if r == label and h == label)
        fp = sum(1 for r, h in zip(ref_labels, hyp_labels) if r != label and h == label)
        fn = sum(1 for r, h in zip(ref_labels, hyp_labels) if r == label and h != label)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        per_label[label.value] = _f1(p, r)
    macro = sum(per_label.values()) / len(per_label)
    return LabelScore(accuracy=accuracy, macro_f1=macro, per_label_f1=per_label)


# ---------------------------------------------------------------------------
# agreement

def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> KappaScore:
    """Cohen's kappa between two categorical sequences of equal length.

    Degenerate case: expected agreement 1 (both raters constant on the same
    marginals) yields kappa 1 if the observed agreement is perfect, else 0.
    """
    if len(a) != len(b):
        raise MetricError(f"sequences differ in length ({len(a)} vs {len(b)})")
    if len(a) == 0:
        raise MetricError("empty sequences")
    n = len(a)
    po = sum(1 for x, y in zip(a, b) if x == y) / n
    counts_a = Counter(a)
    counts_b = Counter(b)
    pe = sum(counts_a[c] * counts_b.get(c, 0) for c in counts_a) / (n * n)
    if pe >= 1.0:
        kappa = 1.0 if po == 1.0 else 0.0
    else:
        kappa = (po - pe) / (1.0 - pe)
    return KappaScore(kappa=kappa, observed_agreement=po, expected_agreement=pe)


def segmentation_kappa(ref: AlignmentDocument, hyp: AlignmentDocument, side: str) -> KappaScore:
    """Kappa over the binary boundary decision at each gap of one side."""
    n = len(ref.side(side))
    if n != len(hyp.side(side)):
        raise MetricError("documents cover different token counts")
    a = boundary_string(ref.side_spans(side), n)
    b = boundary_string(hyp.side_spans(side), n)
    return cohen_kappa(a, b)


def label_kappa(ref: AlignmentDocument, hyp: AlignmentDocument) -> KappaScore:
    """Kappa over token-level labels (both sides concatenated)."""
    return cohen_kappa([l.value for l in token_labels(ref)], [l.value for l in token_labels(hyp)])
