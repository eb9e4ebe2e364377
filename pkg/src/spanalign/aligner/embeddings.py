"""Deterministic fallback embedder and similarity helpers.

The fallback embedder maps each unit string to the L2-normalized bag of its
hashed character trigrams. It has no notion of semantics but is reproducible
across runs and platforms, which makes it the test and offline stand-in for
neural encoders: identical strings get cosine 1 and string overlap degrades
gracefully.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from ..embfile import EmbeddingMatrix


def _gram_index(gram: str, dim: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def fallback_embed(
    units: Sequence[str],
    dim: int = 64,
    unit: str = "token",
    doc_id: str = "",
) -> EmbeddingMatrix:
    """Hashed character-trigram embeddings, one unit-norm row per string.

    Strings shorter than 3 characters hash as a single gram; an empty
    string maps to the first basis vector.
    """
    if dim < 8:
        raise ValueError(f"dim must be at least 8, got {dim}")
    vectors = np.zeros((len(units), dim), dtype=np.float64)
    for row, text in enumerate(units):
        if len(text) < 3:
            grams = [text] if text else []
        else:
            grams = [text[i : i + 3] for i in range(len(text) - 2)]
        if not grams:
            vectors[row, 0] = 1.0
            continue
        for gram in grams:
            vectors[row, _gram_index(gram, dim)] += 1.0
        vectors[row] /= np.linalg.norm(vectors[row])
    return EmbeddingMatrix(unit=unit, vectors=vectors.astype(np.float32), doc_id=doc_id, model_tag="fallback-trigram")


def similarity_matrix(src: EmbeddingMatrix, tgt: EmbeddingMatrix) -> np.ndarray:
    """Cosine similarities between all row pairs (rows are unit-normalized)."""
    if src.dim != tgt.dim:
        raise ValueError(f"embedding dimensions differ: {src.dim} vs {tgt.dim}")
    sim = src.vectors.astype(np.float64) @ tgt.vectors.astype(np.float64).T
    return np.clip(sim, -1.0, 1.0)


def normalized_sum(vectors: np.ndarray) -> np.ndarray:
    """L2-normalized sum of rows; the zero vector stays zero."""
    total = vectors.sum(axis=0)
    norm = np.linalg.norm(total)
    return total / norm if norm > 0 else total
