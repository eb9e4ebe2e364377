"""Evaluation report assembly: the full metric suite over a (ref, hyp)
document pair, a fixed-width table grouped the same way as the published
results (Segmentation / Relaxed match / Exact match / Word align / Label
match / #span), and a flat key-value form for machine consumption.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .metrics import (
    LabelScore,
    MetricError,
    SegmentationScore,
    SpanAlignScore,
    WordAlignScore,
    evaluate_labels,
    evaluate_segmentation,
    evaluate_span_alignment,
    evaluate_word_alignment,
    macro_word_alignment,
    word_link_sets,
)
from .model import SOURCE, TARGET, AlignmentDocument

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class EvaluationReport:
    pair_id: str
    segmentation_source: SegmentationScore
    segmentation_target: SegmentationScore
    span_alignment: SpanAlignScore
    word_alignment: WordAlignScore
    labels: LabelScore | None
    span_count_src: int
    span_count_tgt: int


def evaluate_pair(ref: AlignmentDocument, hyp: AlignmentDocument, k: int | None = None) -> EvaluationReport:
    """All metrics for one hypothesis document against its reference."""
    seg = {}
    for side in (SOURCE, TARGET):
        n = len(ref.side(side))
        if n != len(hyp.side(side)):
            raise MetricError(f"{side} token counts differ between reference and hypothesis")
        seg[side] = evaluate_segmentation(ref.side_spans(side), hyp.side_spans(side), n, k)
    sure, possible = word_link_sets(ref)
    pred = {(w.src_token, w.tgt_token) for w in hyp.word_links}
    try:
        labels = evaluate_labels(ref, hyp)
    except MetricError as exc:
        log.warning("label match skipped: %s", exc)
        labels = None
    return EvaluationReport(
        pair_id=ref.pair_id,
        segmentation_source=seg[SOURCE],
        segmentation_target=seg[TARGET],
        span_alignment=evaluate_span_alignment(list(ref.span_links), list(hyp.span_links)),
        word_alignment=evaluate_word_alignment(pred, sure, possible),
        labels=labels,
        span_count_src=len(hyp.side_spans(SOURCE)),
        span_count_tgt=len(hyp.side_spans(TARGET)),
    )


def report_to_dict(report: EvaluationReport) -> dict:
    """Flat machine-readable key-value form."""
    seg_s, seg_t = report.segmentation_source, report.segmentation_target
    out = {
        "pair_id": report.pair_id,
        "segmentation.src.precision": seg_s.precision,
        "segmentation.src.recall": seg_s.recall,
        "segmentation.src.f1": seg_s.f1,
        "segmentation.src.accuracy": seg_s.accuracy,
        "segmentation.src.pk": seg_s.pk,
        "segmentation.src.window_diff": seg_s.window_diff,
        "segmentation.src.k": seg_s.k,
        "segmentation.tgt.precision": seg_t.precision,
        "segmentation.tgt.recall": seg_t.recall,
        "segmentation.tgt.f1": seg_t.f1,
        "segmentation.tgt.accuracy": seg_t.accuracy,
        "segmentation.tgt.pk": seg_t.pk,
        "segmentation.tgt.window_diff": seg_t.window_diff,
        "segmentation.tgt.k": seg_t.k,
        "relaxed.precision": report.span_alignment.relaxed_precision,
        "relaxed.recall": report.span_alignment.relaxed_recall,
        "relaxed.f1": report.span_alignment.relaxed_f1,
        "exact.with_labels": report.span_alignment.exact_with_labels,
        "exact.without_labels": report.span_alignment.exact_without_labels,
        "word.aer": report.word_alignment.aer,
        "word.precision": report.word_alignment.precision,
        "word.recall": report.word_alignment.recall,
        "word.f1": report.word_alignment.f1,
        "span_count.src": report.span_count_src,
        "span_count.tgt": report.span_count_tgt,
    }
    if report.labels is not None:
        out["label.accuracy"] = report.labels.accuracy
        out["label.macro_f1"] = report.labels.macro_f1  # macro-averaged over reference labels
        for label, f1 in report.labels.per_label_f1.items():
            out[f"label.f1.{label}"] = f1
    return out


def format_report(report: EvaluationReport) -> str:
    """Fixed-width table mirroring the published column groups."""
    seg_s, seg_t = report.segmentation_source, report.segmentation_target
    span = report.span_alignment
    word = report.word_alignment

    def pct(x: float) -> str:
        return f"{100 * x:6.2f}"

    def frac(x: float | None) -> str:
        return "   n/a" if x is None else f"{x:6.2f}"

    lines = [
        f"pair: {report.pair_id}   (window size k={seg_s.k})",
        "",
        "Segmentation (boundary metrics; src / tgt)",
        f"  P     {pct(seg_s.precision)} / {pct(seg_t.precision)}",
        f"  R     {pct(seg_s.recall)} / {pct(seg_t.recall)}",
        f"  F1    {pct(seg_s.f1)} / {pct(seg_t.f1)}",
        f"  Df    {frac(seg_s.window_diff)} / {frac(seg_t.window_diff)}",
        f"  Pk    {frac(seg_s.pk)} / {frac(seg_t.pk)}",
        "",
        "Relaxed match",
        f"  P {frac(span.relaxed_precision)}  R {frac(span.relaxed_recall)}  F1 {frac(span.relaxed_f1)}",
        "",
        "Exact match",
        f"  w/ labels {span.exact_with_labels:6.2f}  w/o labels {span.exact_without_labels:6.2f}",
        "",
        "Word align.",
        f"  AER {frac(word.aer)}  P {frac(word.precision)}  R {frac(word.recall)}  F1 {frac(word.f1)}",
        "",
    ]
    if report.labels is not None:
        lines += [
            "Label match (F1 macro-averaged over reference labels)",
            f"  acc {pct(report.labels.accuracy)}  F1 {frac(report.labels.macro_f1)}",
            "",
        ]
    lines.append(f"#span   src {report.span_count_src}  tgt {report.span_count_tgt}")
    return "\n".join(lines)


def aggregate_reports(reports: list[EvaluationReport]) -> dict:
    """Macro-average the flat report values over recordings (unweighted)."""
    if not reports:
        raise MetricError("nothing to aggregate")
    word = macro_word_alignment([r.word_alignment for r in reports])
    keys = set.intersection(*(set(report_to_dict(r)) for r in reports)) - {"pair_id"}
    flat: dict[str, float] = {}
    for key in sorted(keys):
        values = [report_to_dict(r)[key] for r in reports]
        if any(v is None for v in values):
            continue
        flat[key] = sum(values) / len(values)
    flat["word.aer"] = word.aer
    flat["word.precision"] = word.precision
    flat["word.recall"] = word.recall
    flat["word.f1"] = word.f1
    flat["recordings"] = len(reports)
    return flat
