"""Iterative mutual-argmax word alignment over a similarity matrix.

Each round adds every cell that is maximal in both its row and its column
(ties broken toward the lowest index), then freezes the matched rows and
columns; later rounds only consider the still-unmatched submatrix, so the
result is always a partial matching. No positional prior is applied
(zero distortion).
"""

from __future__ import annotations

import numpy as np


def itermax_word_align(sim: np.ndarray, iters: int = 2, decay: float = 0.9) -> set[tuple[int, int]]:
    """Return the matched (row, column) pairs.

    ``decay`` is accepted for compatibility with the damped formulation of
    the iteration; restricting each round to unmatched rows and columns
    already excludes every cell the damping would touch, so it does not
    influence the result.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if not 0 < decay <= 1:
        raise ValueError("decay must be in (0, 1]")
    sim = np.asarray(sim, dtype=np.float64)
    if sim.size == 0:
        return set()
    n, m = sim.shape
    pairs: set[tuple[int, int]] = set()
    free_rows = list(range(n))
    free_cols = list(range(m))
    for _ in range(iters):
        if not free_rows or not free_cols:
            break
        added = mutual_argmax(sim, free_rows, free_cols)
        if not added:
            break
        pairs.update(added)
        used_rows = {i for i, _ in added}
        used_cols = {j for _, j in added}
        free_rows = [i for i in free_rows if i not in used_rows]
        free_cols = [j for j in free_cols if j not in used_cols]
    return pairs


def mutual_argmax(
    sim: np.ndarray,
    rows: list[int] | None = None,
    cols: list[int] | None = None,
) -> set[tuple[int, int]]:
    """Cells maximal in both their row and column of the given submatrix,
    ties broken toward the lowest index."""
    n, m = sim.shape
    rows = list(range(n)) if rows is None else rows
    cols = list(range(m)) if cols is None else cols
    if not rows or not cols:
        return set()
    sub = sim[np.ix_(rows, cols)]
    row_best = sub.argmax(axis=1)  # first maximal index
    col_best = sub.argmax(axis=0)
    return {
        (rows[r], cols[row_best[r]])
        for r in range(len(rows))
        if col_best[row_best[r]] == r
    }
