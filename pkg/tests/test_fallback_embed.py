import numpy as np
import pytest

from spanalign.aligner.embeddings import fallback_embed, normalized_sum, similarity_matrix


def test_identical_strings_identical_rows():
    emb = fallback_embed(["abc", "abc"], dim=32)
    sim = similarity_matrix(emb, emb)
    assert sim[0, 1] == pytest.approx(1.0, abs=1e-9)
    assert np.array_equal(emb.vectors[0], emb.vectors[1])


def test_distinct_trigram_sets_not_identical():
    emb = fallback_embed(["abc", "xyz"], dim=64)
    sim = similarity_matrix(emb, emb)
    assert sim[0, 1] < 1.0


def test_rows_unit_norm():
    emb = fallback_embed(["hello there", "x", "", "delší věta s diakritikou"], dim=48)
    norms = np.linalg.norm(emb.vectors.astype(np.float64), axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_deterministic_across_calls():
    a = fallback_embed(["some text", "more text"], dim=64)
    b = fallback_embed(["some text", "more text"], dim=64)
    assert np.array_equal(a.vectors, b.vectors)


def test_min_dim_enforced():
    with pytest.raises(ValueError):
        fallback_embed(["x"], dim=4)


def test_overlapping_strings_more_similar_than_disjoint():
    emb = fallback_embed(["the quick brown fox", "the quick brown cat", "zzz qqq www"], dim=128)
    sim = similarity_matrix(emb, emb)
    assert sim[0, 1] > sim[0, 2]


def test_normalized_sum():
    v = np.array([[3.0, 0.0], [0.0, 4.0]])
    out = normalized_sum(v)
    assert out == pytest.approx(np.array([0.6, 0.8]))
    assert np.array_equal(normalized_sum(np.zeros((2, 2))), np.zeros(2))
