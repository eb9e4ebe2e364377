"""Split coarse span links where punctuation aligns with punctuation.

Inside each two-sided link, every word link joining two punctuation tokens
cuts both spans immediately after its endpoints (punctuation stays with the
preceding sub-span). The resulting sub-spans pair up in order; word links
move to the sub-link containing both endpoints and links straddling a cut
are dropped. One-sided links pass through unchanged.
"""

from __future__ import annotations

import unicodedata
from bisect import bisect_right
from typing import Iterable, Sequence

from ..model import Span, SpanLink, Token, WordLink


def is_punctuation(surface: str) -> bool:
    """True for tokens made of punctuation characters; the hesitation marker
    ``@`` is transcript markup, not punctuation, and never cuts."""
    if surface == "@":
        return False
    return all(unicodedata.category(ch).startswith("P") for ch in surface)


def sub_segment(
    span_links: Sequence[SpanLink],
    word_links: Iterable[WordLink],
    src_tokens: Sequence[Token],
    tgt_tokens: Sequence[Token],
) -> tuple[list[SpanLink], list[WordLink]]:
    """Return the refined span links and the word links reassigned to them."""
    by_parent: dict[str, list[WordLink]] = {}
    for wl in word_links:
        by_parent.setdefault(wl.parent, []).append(wl)

    out_links: list[SpanLink] = []
    out_words: list[WordLink] = []
    for link in span_links:
        children = by_parent.get(link.id, [])
        if link.is_one_sided:
            out_links.append(link)
            out_words.extend(children)
            continue
        cuts = _cut_points(link, children, src_tokens, tgt_tokens)
        if not cuts:
            out_links.append(link)
            out_words.extend(children)
            continue
        src_cuts = [c[0] for c in cuts]
        tgt_cuts = [c[1] for c in cuts]
        src_edges = [link.src.start, *src_cuts, link.src.end]
        tgt_edges = [link.tgt.start, *tgt_cuts, link.tgt.end]
        sub_ids = [f"{link.id}.{part}" for part in range(len(cuts) + 1)]
        for part, sub_id in enumerate(sub_ids):
            out_links.append(
                SpanLink(
                    id=sub_id,
                    src=Span("source", src_edges[part], src_edges[part + 1]),
                    tgt=Span("target", tgt_edges[part], tgt_edges[part + 1]),
                    label=link.label,
                )
            )
        for wl in children:
            src_part = bisect_right(src_cuts, wl.src_token)
            tgt_part = bisect_right(tgt_cuts, wl.tgt_token)
            if src_part == tgt_part:
                out_words.append(WordLink(wl.src_token, wl.tgt_token, wl.strength, sub_ids[src_part]))
    return out_links, out_words


def _cut_points(
    link: SpanLink,
    children: Sequence[WordLink],
    src_tokens: Sequence[Token],
    tgt_tokens: Sequence[Token],
) -> list[tuple[int, int]]:
    """Strictly increasing (src, tgt) cut positions from punctuation-punctuation links."""
    candidates: set[tuple[int, int]] = set()
    for wl in children:
        if is_punctuation(src_tokens[wl.src_token].surface) and is_punctuation(tgt_tokens[wl.tgt_token].surface):
            src_cut = wl.src_token + 1
            tgt_cut = wl.tgt_token + 1
            if src_cut < link.src.end and tgt_cut < link.tgt.end:
                candidates.add((src_cut, tgt_cut))
    cuts: list[tuple[int, int]] = []
    for src_cut, tgt_cut in sorted(candidates):
        if not cuts or (src_cut > cuts[-1][0] and tgt_cut > cuts[-1][1]):
            cuts.append((src_cut, tgt_cut))  # drop crossing cut pairs
    return cuts
