"""Comparison baselines: window-limited global word alignment and the
label/boundary-preserving random span baseline."""

from __future__ import annotations

import logging
import random

from ..embfile import EmbeddingMatrix
from ..model import (
    ONE_SIDED_LABELS,
    SOURCE,
    TARGET,
    AlignmentDocument,
    Span,
    SpanLabel,
    SpanLink,
)
from ..validation import validate_document
from .embeddings import similarity_matrix
from .itermax import itermax_word_align
from .params import AlignerParams

log = logging.getLogger(__name__)


def baseline_word_align(
    src_tok_emb: EmbeddingMatrix,
    tgt_tok_emb: EmbeddingMatrix,
    params: AlignerParams = AlignerParams(),
) -> set[tuple[int, int]]:
    """Mutual-argmax alignment over the full token similarity matrix, keeping
    only pairs whose positions differ by at most ``baseline_max_distance``.

    Token embeddings are expected to come from the sliding-window encoder
    (window/stride per ``params``); links are position-filtered because the
    global matrix has no segment structure to constrain them.
    """
    sim = similarity_matrix(src_tok_emb, tgt_tok_emb)
    pairs = itermax_word_align(sim, params.itermax_iters, params.itermax_decay)
    limit = params.baseline_max_distance
    return {(i, j) for i, j in pairs if abs(i - j) <= limit}


def random_baseline(ref: AlignmentDocument, seed: int) -> AlignmentDocument:
    """Random re-annotation preserving the reference's boundary counts per
    side and its label multiset.

    Boundaries are drawn uniformly without replacement per side; segments
    are then walked left to right on both sides in parallel, drawing each
    link's label from the shuffled pool of reference labels. An addition
    label consumes a segment on one side only, preferring source and target
    alternately but never starving the two-sided labels still in the pool.
    Deterministic for a given seed.
    """
    report = validate_document(ref)
    if not report.is_complete or not report.ok:
        raise ValueError(f"random_baseline needs a complete valid reference, got errors={sorted(report.codes())}")
    rng = random.Random(seed)

    segments = {}
    for side in (SOURCE, TARGET):
        n = len(ref.side(side))
        n_boundaries = max(0, len(ref.side_spans(side)) - 1)
        positions = sorted(rng.sample(range(1, n), n_boundaries)) if n > 1 else []
        edges = [0, *positions, n]
        segments[side] = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)] if n > 0 else []

    pool = [link.label for link in ref.span_links]
    rng.shuffle(pool)

    links: list[SpanLink] = []
    src_segs, tgt_segs = segments[SOURCE], segments[TARGET]
    si = ti = 0
    prefer_source = True
    pool_pos = 0
    while si < len(src_segs) or ti < len(tgt_segs):
        if pool_pos >= len(pool):
            # inconsistent reference data; keep covering segments anyway
            log.warning("label pool exhausted with segments remaining; re-drawing from the full pool")
            refill = [link.label for link in ref.span_links]
            rng.shuffle(refill)
            pool.extend(refill)
        label = pool[pool_pos]
        pool_pos += 1
        two_sided_left = sum(1 for l in pool[pool_pos:] if l not in ONE_SIDED_LABELS)
        if label in ONE_SIDED_LABELS:
            src_slack = (len(src_segs) - si) - two_sided_left
            tgt_slack = (len(tgt_segs) - ti) - two_sided_left
            use_source = (prefer_source and src_slack > 0) or tgt_slack <= 0
            if use_source and si < len(src_segs):
                start, end = src_segs[si]
                si += 1
                links.append(SpanLink(f"r{len(links)}", Span(SOURCE, start, end), None, label))
                prefer_source = False
            elif ti < len(tgt_segs):
                start, end = tgt_segs[ti]
                ti += 1
                links.append(SpanLink(f"r{len(links)}", None, Span(TARGET, start, end), label))
                prefer_source = True
            else:
                pool_pos -= 1  # no segment can take this label; should not happen on valid refs
                log.warning("dropping surplus %s label: no segments left on either side", label)
                pool.pop(pool_pos)
        else:
            if si >= len(src_segs) or ti >= len(tgt_segs):
                log.warning("dropping surplus %s label: a side has no segments left", label)
                continue
            s0, s1 = src_segs[si]
            t0, t1 = tgt_segs[ti]
            si += 1
            ti += 1
            links.append(SpanLink(f"r{len(links)}", Span(SOURCE, s0, s1), Span(TARGET, t0, t1), label))

    return AlignmentDocument(
        pair_id=ref.pair_id,
        source=ref.source,
        target=ref.target,
        span_links=tuple(links),
        word_links=(),
        meta=ref.meta,
    )
