"""Coarse n-m alignment of transcript lines by dynamic programming.

Two passes: a high-precision anchor pass finds a monotonic 1-1 chain of
line matches restricted to each source line's top-k most similar target
lines; the bead pass then searches, inside a corridor around that chain,
for the score-maximal monotonic partition of both line sequences into
n-m groups ("beads").

A bead of a source lines and b target lines scores the cosine between the
normalized sums of its line vectors, scaled by the character-length ratio
of the grouped text when ``len_penalty`` is on. Beads with an empty side
score the flat ``skip`` parameter. Ties prefer more, smaller beads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..embfile import EmbeddingMatrix
from .embeddings import similarity_matrix
from .params import AlignerParams

NEG_INF = float("-inf")


@dataclass(frozen=True, slots=True)
class Bead:
    """One aligned group: half-open line ranges on each side (possibly empty)."""

    src_lines: tuple[int, int]
    tgt_lines: tuple[int, int]
    score: float

    def __post_init__(self) -> None:
        if self.src_lines[0] == self.src_lines[1] and self.tgt_lines[0] == self.tgt_lines[1]:
            raise ValueError("bead with both sides empty")


class AlignerError(ValueError):
    pass


def coarse_align(
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    src_lines: Sequence[str],
    tgt_lines: Sequence[str],
    params: AlignerParams = AlignerParams(),
) -> list[Bead]:
    """Align two line sequences into a monotonic bead partition."""
    n, m = len(src_lines), len(tgt_lines)
    if src_emb.count != n:
        raise AlignerError(f"source embeddings cover {src_emb.count} lines, transcript has {n}")
    if tgt_emb.count != m:
        raise AlignerError(f"target embeddings cover {tgt_emb.count} lines, transcript has {m}")
    if n == 0 and m == 0:
        return []
    if n == 0:
        return [Bead((0, 0), (j, j + 1), params.skip) for j in range(m)]
    if m == 0:
        return [Bead((i, i + 1), (0, 0), params.skip) for i in range(n)]

    sim = similarity_matrix(src_emb, tgt_emb)
    anchors = _anchor_chain(sim, params)
    lo, hi = _corridor(anchors, n, m, params.window)
    beads = _bead_pass(sim, src_emb, tgt_emb, src_lines, tgt_lines, params, lo, hi)
    if beads is None:
        # steep anchor chains can disconnect the corridor; fall back to the full grid
        lo = [0] * (n + 1)
        hi = [m] * (n + 1)
        beads = _bead_pass(sim, src_emb, tgt_emb, src_lines, tgt_lines, params, lo, hi)
        assert beads is not None
    return beads


def _anchor_chain(sim: np.ndarray, params: AlignerParams) -> list[tuple[int, int]]:
    """Optimal monotonic 1-1 chain of top-k line matches (skips score ``skip``)."""
    n, m = sim.shape
    k = min(params.top_k, m)
    allowed = np.zeros((n, m), dtype=bool)
    for i in range(n):
        order = np.argsort(-sim[i], kind="stable")  # ties toward the lowest index
        allowed[i, order[:k]] = True

    score = np.full((n + 1, m + 1), NEG_INF)
    move = np.zeros((n + 1, m + 1), dtype=np.int8)  # 1 diag, 2 skip-src, 3 skip-tgt
    score[0, 0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best, how = NEG_INF, 0
            if i > 0 and j > 0 and allowed[i - 1, j - 1] and score[i - 1, j - 1] > NEG_INF:
                best, how = score[i - 1, j - 1] + sim[i - 1, j - 1], 1
            if i > 0 and score[i - 1, j] > NEG_INF and score[i - 1, j] + params.skip > best:
                best, how = score[i - 1, j] + params.skip, 2
            if j > 0 and score[i, j - 1] > NEG_INF and score[i, j - 1] + params.skip > best:
                best, how = score[i, j - 1] + params.skip, 3
            score[i, j], move[i, j] = best, how

    anchors: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 or j > 0:
        how = move[i, j]
        if how == 1:
            anchors.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif how == 2:
            i -= 1
        else:
            j -= 1
    anchors.reverse()
    return anchors


def _corridor(anchors: list[tuple[int, int]], n: int, m: int, window: int) -> tuple[list[int], list[int]]:
    """Per source position, the allowed target-position band around the chain."""
    xs = [0.0] + [i + 0.5 for i, _ in anchors] + [float(n)]
    ys = [0.0] + [j + 0.5 for _, j in anchors] + [float(m)]
    lo = [0] * (n + 1)
    hi = [0] * (n + 1)
    for i in range(n + 1):
        y = float(np.interp(i, xs, ys))
        lo[i] = max(0, math.floor(y) - window)
        hi[i] = min(m, math.ceil(y) + window)
    for i in range(1, n + 1):  # keep the band monotone
        lo[i] = max(lo[i], lo[i - 1])
        hi[i] = max(hi[i], hi[i - 1])
    return lo, hi


def _bead_pass(
    sim: np.ndarray,
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    src_lines: Sequence[str],
    tgt_lines: Sequence[str],
    params: AlignerParams,
    lo: list[int],
    hi: list[int],
) -> list[Bead] | None:
    n, m = sim.shape
    src_prefix = np.vstack([np.zeros(src_emb.dim), np.cumsum(src_emb.vectors.astype(np.float64), axis=0)])
    tgt_prefix = np.vstack([np.zeros(tgt_emb.dim), np.cumsum(tgt_emb.vectors.astype(np.float64), axis=0)])
    src_chars = _char_prefix(src_lines)
    tgt_chars = _char_prefix(tgt_lines)

    def bead_score(i0: int, i1: int, j0: int, j1: int) -> float:
        if i0 == i1 or j0 == j1:
            return params.skip
        u = src_prefix[i1] - src_prefix[i0]
        v = tgt_prefix[j1] - tgt_prefix[j0]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        cos = 0.0 if nu == 0 or nv == 0 else float(np.dot(u, v) / (nu * nv))
        cos = max(-1.0, min(1.0, cos))
        if params.len_penalty:
            cs = src_chars[i1] - src_chars[i0]
            ct = tgt_chars[j1] - tgt_chars[j0]
            if max(cs, ct) > 0:
                cos *= min(cs, ct) / max(cs, ct)
        return cos

    # score-maximal partition; ties prefer more beads, then the first
    # transition in (a ascending, b ascending) order
    score: list[list[float]] = [[NEG_INF] * (m + 1) for _ in range(n + 1)]
    nbeads: list[list[int]] = [[0] * (m + 1) for _ in range(n + 1)]
    back: list[list[tuple[int, int] | None]] = [[None] * (m + 1) for _ in range(n + 1)]
    score[0][0] = 0.0
    for i in range(n + 1):
        for j in range(lo[i], hi[i] + 1):
            if i == 0 and j == 0:
                continue
            best, best_beads, best_from = NEG_INF, -1, None
            for a in range(0, min(params.max_align, i) + 1):
                pi = i - a
                for b in range(0, min(params.max_align, j) + 1):
                    if a == 0 and b == 0:
                        continue
                    pj = j - b
                    if not lo[pi] <= pj <= hi[pi]:
                        continue
                    prev = score[pi][pj]
                    if prev == NEG_INF:
                        continue
                    cand = prev + bead_score(pi, i, pj, j)
                    cand_beads = nbeads[pi][pj] + 1
                    if cand > best or (cand == best and cand_beads > best_beads):
                        best, best_beads, best_from = cand, cand_beads, (a, b)
            score[i][j], nbeads[i][j], back[i][j] = best, best_beads, best_from

    if score[n][m] == NEG_INF:
        return None
    beads: list[Bead] = []
    i, j = n, m
    while i > 0 or j > 0:
        a, b = back[i][j]
        beads.append(Bead((i - a, i), (j - b, j), score[i][j] - score[i - a][j - b]))
        i, j = i - a, j - b
    beads.reverse()
    return beads


def _char_prefix(lines: Sequence[str]) -> list[int]:
    out = [0]
    for line in lines:
        out.append(out[-1] + len(line))
    return out
