"""The three-step automatic alignment pipeline.

1. Coarse line-level alignment (beads) from line embeddings.
2. Word alignment inside each bead by iterative mutual argmax on token
   embeddings, then sub-segmentation at aligned punctuation.
3. Labeling: ADDU for one-sided links and either TRAN everywhere else
   (default mode) or a trained classifier's prediction.

The output always validates as a complete document: beads partition the
lines, lines partition the tokens.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..embfile import EmbeddingMatrix
from ..labeler import MLPParams, predict_labels
from ..model import (
    SOURCE,
    TARGET,
    AlignmentDocument,
    DocumentMeta,
    Span,
    SpanLink,
    TranscriptSide,
    WordLink,
)
from ..validation import validate_document
from .coarse import AlignerError, Bead, coarse_align
from .embeddings import normalized_sum, similarity_matrix
from .itermax import itermax_word_align
from .params import AlignerParams
from .subsegment import sub_segment


def beads_to_links(beads: list[Bead], src_side: TranscriptSide, tgt_side: TranscriptSide) -> list[SpanLink]:
    """Convert line-range beads to unlabeled token-range span links."""
    links: list[SpanLink] = []
    for idx, bead in enumerate(beads):
        src_span = _line_range_to_span(bead.src_lines, src_side, SOURCE)
        tgt_span = _line_range_to_span(bead.tgt_lines, tgt_side, TARGET)
        links.append(SpanLink(id=f"b{idx}", src=src_span, tgt=tgt_span, label=None))
    return links


def _line_range_to_span(line_range: tuple[int, int], side: TranscriptSide, side_name: str) -> Span | None:
    first, last = line_range
    if first == last:
        return None
    start = side.lines[first][0]
    end = side.lines[last - 1][1]
    return Span(side_name, start, end)


def word_align_links(
    links: list[SpanLink],
    src_tok_emb: EmbeddingMatrix,
    tgt_tok_emb: EmbeddingMatrix,
    params: AlignerParams,
) -> list[WordLink]:
    """Mutual-argmax word links inside each two-sided link (emitted as sure)."""
    sim = similarity_matrix(src_tok_emb, tgt_tok_emb)
    out: list[WordLink] = []
    for link in links:
        if link.is_one_sided:
            continue
        sub = sim[link.src.start : link.src.end, link.tgt.start : link.tgt.end]
        for i, j in sorted(itermax_word_align(sub, params.itermax_iters, params.itermax_decay)):
            out.append(WordLink(link.src.start + i, link.tgt.start + j, "sure", link.id))
    return out


def span_similarities(
    links: list[SpanLink],
    src_tok_emb: EmbeddingMatrix,
    tgt_tok_emb: EmbeddingMatrix,
) -> dict[str, float]:
    """Cosine of the normalized token-vector sums of each two-sided link's spans."""
    out: dict[str, float] = {}
    for link in links:
        if link.is_one_sided:
            continue
        u = normalized_sum(src_tok_emb.vectors[link.src.start : link.src.end].astype(np.float64))
        v = normalized_sum(tgt_tok_emb.vectors[link.tgt.start : link.tgt.end].astype(np.float64))
        out[link.id] = float(np.clip(np.dot(u, v), -1.0, 1.0))
    return out


def run_pipeline(
    src_side: TranscriptSide,
    tgt_side: TranscriptSide,
    src_line_emb: EmbeddingMatrix,
    tgt_line_emb: EmbeddingMatrix,
    src_tok_emb: EmbeddingMatrix,
    tgt_tok_emb: EmbeddingMatrix,
    params: AlignerParams = AlignerParams(),
    labeler_params: MLPParams | None = None,
    pair_id: str | None = None,
) -> AlignmentDocument:
    """Full pipeline over one transcript pair; the result is complete and valid."""
    _check_embedding(src_line_emb, "line", len(src_side.lines), "source line")
    _check_embedding(tgt_line_emb, "line", len(tgt_side.lines), "target line")
    _check_embedding(src_tok_emb, "token", len(src_side), "source token")
    _check_embedding(tgt_tok_emb, "token", len(tgt_side), "target token")
    if src_line_emb.dim != tgt_line_emb.dim:
        raise AlignerError(f"line embedding dimensions differ: {src_line_emb.dim} vs {tgt_line_emb.dim}")
    if src_tok_emb.dim != tgt_tok_emb.dim:
        raise AlignerError(f"token embedding dimensions differ: {src_tok_emb.dim} vs {tgt_tok_emb.dim}")

    beads = coarse_align(src_line_emb, tgt_line_emb, src_side.line_texts(), tgt_side.line_texts(), params)
    links = beads_to_links(beads, src_side, tgt_side)
    words = word_align_links(links, src_tok_emb, tgt_tok_emb, params)
    links, words = sub_segment(links, words, src_side.tokens, tgt_side.tokens)
    doc = AlignmentDocument(
        pair_id=pair_id or f"{src_side.doc_id}--{tgt_side.doc_id}",
        source=src_side,
        target=tgt_side,
        span_links=tuple(links),
        word_links=tuple(words),
        meta=DocumentMeta(annotator_id="pipeline"),
    )
    doc = predict_labels(
        doc,
        params=labeler_params,
        span_similarities=span_similarities(links, src_tok_emb, tgt_tok_emb) if labeler_params is not None else None,
    )
    report = validate_document(doc)
    if not report.ok or not report.is_complete:
        raise AssertionError(f"pipeline produced an invalid document: {[e.code for e in report.errors]}")
    return doc


def _check_embedding(emb: EmbeddingMatrix | None, unit: str, count: int, what: str) -> None:
    if emb is None:
        raise AlignerError(f"missing {what} embeddings")
    if emb.unit != unit:
        raise AlignerError(f"{what} embeddings carry unit {emb.unit!r}, expected {unit!r}")
    if emb.count != count:
        raise AlignerError(f"{what} embeddings cover {emb.count} units, transcript has {count}")


class SpanAligner(BaseEstimator):
    """Estimator-style front end to the pipeline.

    Hyper-parameters mirror :class:`AlignerParams`; ``predict`` runs the
    pipeline over one transcript pair given its embeddings and returns the
    aligned document.
    """

    def __init__(
        self,
        max_align: int = 10,
        top_k: int = 10,
        window: int = 10,
        skip: float = 0.0,
        len_penalty: bool = True,
        itermax_iters: int = 2,
        itermax_decay: float = 0.9,
        labeler_params: MLPParams | None = None,
    ):
        self.max_align = max_align
        self.top_k = top_k
        self.window = window
        self.skip = skip
        self.len_penalty = len_penalty
        self.itermax_iters = itermax_iters
        self.itermax_decay = itermax_decay
        self.labeler_params = labeler_params

    def _params(self) -> AlignerParams:
        return AlignerParams(
            max_align=self.max_align,
            top_k=self.top_k,
            window=self.window,
            skip=self.skip,
            len_penalty=self.len_penalty,
            itermax_iters=self.itermax_iters,
            itermax_decay=self.itermax_decay,
        )

    def predict(
        self,
        src_side: TranscriptSide,
        tgt_side: TranscriptSide,
        src_line_emb: EmbeddingMatrix,
        tgt_line_emb: EmbeddingMatrix,
        src_tok_emb: EmbeddingMatrix,
        tgt_tok_emb: EmbeddingMatrix,
    ) -> AlignmentDocument:
        return run_pipeline(
            src_side,
            tgt_side,
            src_line_emb,
            tgt_line_emb,
            src_tok_emb,
            tgt_tok_emb,
            params=self._params(),
            labeler_params=self.labeler_params,
        )
