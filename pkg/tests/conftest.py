"""Shared builders: compact document construction and seeded random documents."""

from __future__ import annotations

import random

from spanalign.model import (
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

TWO_SIDED = [SpanLabel.TRAN, SpanLabel.PARA, SpanLabel.SUM, SpanLabel.GEN, SpanLabel.REPL]
ONE_SIDED = [SpanLabel.ADDF, SpanLabel.ADDU]

WORDS = [
    "okamžik", "prosím", "dnes", "hovoří", "konference", "otázka", "systém",
    "moment", "please", "today", "speaks", "conference", "question", "system",
    "merci", "aujourd'hui", "gracias", "sistema", "danke", "heute",
]


def make_side(lines: list[list[str]], role: str = SOURCE, doc_id: str = "d", lang: str = "cs") -> TranscriptSide:
    tokens: list[Token] = []
    ranges: list[tuple[int, int]] = []
    for line_index, line in enumerate(lines):
        start = len(tokens)
        for surface in line:
            tokens.append(Token(index=len(tokens), surface=surface, line_index=line_index))
        ranges.append((start, len(tokens)))
    return TranscriptSide(doc_id=doc_id, lang=lang, role=role, tokens=tuple(tokens), lines=tuple(ranges))


def side_of_length(n: int, role: str = SOURCE, doc_id: str = "d", lang: str = "cs") -> TranscriptSide:
    return make_side([[f"w{i}" for i in range(n)]], role=role, doc_id=doc_id, lang=lang)


def make_doc(
    n_src: int,
    n_tgt: int,
    span_links: list[SpanLink],
    word_links: list[WordLink] = (),
    meta: DocumentMeta | None = None,
    pair_id: str = "pair",
) -> AlignmentDocument:
    return AlignmentDocument(
        pair_id=pair_id,
        source=side_of_length(n_src, SOURCE, doc_id="src"),
        target=side_of_length(n_tgt, TARGET, doc_id="tgt"),
        span_links=tuple(span_links),
        word_links=tuple(word_links),
        meta=meta or DocumentMeta(),
    )


def random_partition(rng: random.Random, n: int, max_segments: int | None = None) -> list[tuple[int, int]]:
    """Random ordered partition of [0, n) into contiguous segments."""
    if n == 0:
        return []
    limit = n - 1 if max_segments is None else min(n - 1, max_segments - 1)
    n_bounds = rng.randint(0, limit) if limit > 0 else 0
    bounds = sorted(rng.sample(range(1, n), n_bounds))
    edges = [0, *bounds, n]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def random_complete_document(rng: random.Random, max_tokens: int = 24, pair_id: str = "rand") -> AlignmentDocument:
    """A structurally valid, complete document with random spans, labels and
    word links. Both sides are fully covered by exactly one span."""
    n_src = rng.randint(2, max_tokens)
    n_tgt = rng.randint(2, max_tokens)
    source = make_side(_random_lines(rng, n_src), SOURCE, doc_id=f"{pair_id}-s")
    target = make_side(_random_lines(rng, n_tgt), TARGET, doc_id=f"{pair_id}-t", lang="en")
    src_segs = random_partition(rng, n_src)
    tgt_segs = random_partition(rng, n_tgt)

    links: list[SpanLink] = []
    word_links: list[WordLink] = []
    si = ti = 0
    while si < len(src_segs) or ti < len(tgt_segs):
        src_left = len(src_segs) - si
        tgt_left = len(tgt_segs) - ti
        choices = []
        if src_left and tgt_left:
            choices.append("two")
        if src_left:
            choices.append("src")
        if tgt_left:
            choices.append("tgt")
        kind = rng.choice(choices)
        link_id = f"L{len(links)}"
        if kind == "two":
            s0, s1 = src_segs[si]
            t0, t1 = tgt_segs[ti]
            si += 1
            ti += 1
            links.append(SpanLink(link_id, Span(SOURCE, s0, s1), Span(TARGET, t0, t1), rng.choice(TWO_SIDED)))
            for _ in range(rng.randint(0, min(s1 - s0, t1 - t0))):
                wl = WordLink(rng.randrange(s0, s1), rng.randrange(t0, t1), rng.choice(["sure", "possible"]), link_id)
                if all(not (w.src_token == wl.src_token and w.tgt_token == wl.tgt_token and w.parent == wl.parent) for w in word_links):
                    word_links.append(wl)
        elif kind == "src":
            s0, s1 = src_segs[si]
            si += 1
            links.append(SpanLink(link_id, Span(SOURCE, s0, s1), None, rng.choice(ONE_SIDED)))
        else:
            t0, t1 = tgt_segs[ti]
            ti += 1
            links.append(SpanLink(link_id, None, Span(TARGET, t0, t1), rng.choice(ONE_SIDED)))
    return AlignmentDocument(
        pair_id=pair_id,
        source=source,
        target=target,
        span_links=tuple(links),
        word_links=tuple(word_links),
        meta=DocumentMeta(interpreter_id="i1", annotator_id=f"a{rng.randint(1, 5)}", relay=rng.random() < 0.3, duration_seconds=600.0),
    )


def _random_lines(rng: random.Random, n_tokens: int) -> list[list[str]]:
    lines: list[list[str]] = []
    remaining = n_tokens
    while remaining > 0:
        take = min(remaining, rng.randint(1, 8))
        line = [rng.choice(WORDS) for _ in range(take - 1)] + ["."] if take > 1 else [rng.choice(WORDS)]
        lines.append(line[:take])
        remaining -= take
    return lines
