import math
import random

import numpy as np
import pytest

from spanalign.aligner.coarse import Bead, coarse_align
from spanalign.aligner.embeddings import fallback_embed
from spanalign.aligner.params import AlignerParams
from spanalign.embfile import EmbeddingMatrix
from oracles import brute_bead_optimum


def _random_instance(rng: random.Random, max_lines: int = 6):
    n = rng.randint(0, max_lines)
    m = rng.randint(0, max_lines)
    dim = 8
    src = _random_unit_rows(rng, n, dim)
    tgt = _random_unit_rows(rng, m, dim)
    src_lines = ["x" * rng.randint(1, 30) for _ in range(n)]
    tgt_lines = ["y" * rng.randint(1, 30) for _ in range(m)]
    params = AlignerParams(
        max_align=rng.choice([1, 2, 3, 10]),
        top_k=10,
        window=10,
        skip=rng.choice([0.0, 0.1, -0.2]),
        len_penalty=rng.random() < 0.5,
    )
    return src, tgt, src_lines, tgt_lines, params


def _random_unit_rows(rng: random.Random, n: int, dim: int) -> EmbeddingMatrix:
    rows = np.zeros((n, dim))
    for i in range(n):
        vec = np.array([rng.gauss(0, 1) for _ in range(dim)])
        rows[i] = vec / np.linalg.norm(vec)
    return EmbeddingMatrix(unit="line", vectors=rows.astype(np.float32))


def _reference_bead_score(src, tgt, src_lines, tgt_lines, params):
    """Bead scorer recomputed from raw vectors for the exhaustive oracle."""
    sv = src.vectors.astype(np.float64)
    tv = tgt.vectors.astype(np.float64)

    def score(i0, i1, j0, j1):
        if i0 == i1 or j0 == j1:
            return params.skip
        u = sv[i0:i1].sum(axis=0)
        v = tv[j0:j1].sum(axis=0)
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        cos = 0.0 if nu == 0 or nv == 0 else float(u @ v / (nu * nv))
        cos = max(-1.0, min(1.0, cos))
        if params.len_penalty:
            cs = sum(len(s) for s in src_lines[i0:i1])
            ct = sum(len(s) for s in tgt_lines[j0:j1])
            if max(cs, ct) > 0:
                cos *= min(cs, ct) / max(cs, ct)
        return cos

    return score


def test_identical_three_line_texts_align_diagonally():
    lines = ["první věta zde .", "druhá věta tady .", "třetí věta nakonec ."]
    src = fallback_embed(lines, dim=64, unit="line")
    tgt = fallback_embed(lines, dim=64, unit="line")
    beads = coarse_align(src, tgt, lines, lines)
    assert [(b.src_lines, b.tgt_lines) for b in beads] == [((0, 1), (0, 1)), ((1, 2), (1, 2)), ((2, 3), (2, 3))]


def test_empty_target_side_gives_per_line_addition_beads():
    lines = ["jedna", "dva", "tři"]
    src = fallback_embed(lines, dim=64, unit="line")
    tgt = fallback_embed([], dim=64, unit="line")
    beads = coarse_align(src, tgt, lines, [])
    assert [(b.src_lines, b.tgt_lines) for b in beads] == [((0, 1), (0, 0)), ((1, 2), (0, 0)), ((2, 3), (0, 0))]


def test_both_sides_empty():
    empty = fallback_embed([], dim=64, unit="line")
    assert coarse_align(empty, empty, [], []) == []


def test_merge_bead_selected_when_one_line_covers_two():
    # source line 1 is the concatenation of target lines 1 and 2, so the
    # 1-2 merge under summed trigram vectors beats both 1-1 alternatives
    src_lines = ["alfa beta gama delta .", "jedna dva tři čtyři . pět šest sedm osm ."]
    tgt_lines = ["alfa beta gama delta .", "jedna dva tři čtyři .", "pět šest sedm osm ."]
    src = fallback_embed(src_lines, dim=256, unit="line")
    tgt = fallback_embed(tgt_lines, dim=256, unit="line")
    params = AlignerParams(len_penalty=True)
    beads = coarse_align(src, tgt, src_lines, tgt_lines, params)
    assert [(b.src_lines, b.tgt_lines) for b in beads] == [((0, 1), (0, 1)), ((1, 2), (1, 3))]
    # cross-check against the exhaustive optimum
    score_fn = _reference_bead_score(src, tgt, src_lines, tgt_lines, params)
    best = brute_bead_optimum(len(src_lines), len(tgt_lines), params.max_align, score_fn)
    assert math.isclose(sum(b.score for b in beads), best, abs_tol=1e-9)


def test_dp_equals_exhaustive_search_on_random_instances():
    rng = random.Random(2024)
    for _ in range(200):
        src, tgt, src_lines, tgt_lines, params = _random_instance(rng)
        n, m = len(src_lines), len(tgt_lines)
        beads = coarse_align(src, tgt, src_lines, tgt_lines, params)
        if n == 0 or m == 0:
            # pinned degenerate behavior: one addition bead per remaining line
            assert len(beads) == n + m
            assert all(b.score == params.skip for b in beads)
            continue
        score_fn = _reference_bead_score(src, tgt, src_lines, tgt_lines, params)
        best = brute_bead_optimum(n, m, params.max_align, score_fn)
        assert math.isclose(sum(b.score for b in beads), best, abs_tol=1e-9)


def test_beads_partition_both_sides_monotonically():
    rng = random.Random(31)
    for _ in range(100):
        src, tgt, src_lines, tgt_lines, params = _random_instance(rng)
        beads = coarse_align(src, tgt, src_lines, tgt_lines, params)
        si = ti = 0
        for bead in beads:
            assert bead.src_lines[0] == si and bead.tgt_lines[0] == ti
            assert bead.src_lines[1] >= si and bead.tgt_lines[1] >= ti
            si, ti = bead.src_lines[1], bead.tgt_lines[1]
        assert si == len(src_lines) and ti == len(tgt_lines)


def test_ties_prefer_more_smaller_beads():
    # no length penalty and skip 0: two unrelated sides where every score is
    # 0-ish would be ambiguous; force exact ties with orthogonal vectors
    dim = 8
    src = EmbeddingMatrix(unit="line", vectors=np.eye(dim, dtype=np.float32)[:2])
    tgt = EmbeddingMatrix(unit="line", vectors=np.eye(dim, dtype=np.float32)[4:6])
    params = AlignerParams(len_penalty=False, skip=0.0)
    beads = coarse_align(src, tgt, ["a", "b"], ["c", "d"], params)
    # every partition scores 0; the most fragmented one wins
    assert len(beads) == 4
    assert all(b.src_lines[1] - b.src_lines[0] + b.tgt_lines[1] - b.tgt_lines[0] == 1 for b in beads)


def test_bead_type_rejects_double_empty():
    with pytest.raises(ValueError):
        Bead((0, 0), (1, 1), 0.0)
