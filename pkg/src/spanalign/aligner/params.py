"""Tunable knobs of the automatic alignment pipeline and its baselines."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True, slots=True)
class AlignerParams:
    max_align: int = 10  # largest number of lines merged into one bead side
    top_k: int = 10  # candidate target lines per source line in the anchor pass
    window: int = 10  # corridor half-width (in lines) around the anchor chain
    skip: float = 0.0  # score of skip moves / empty-side beads
    len_penalty: bool = True  # scale bead scores by the character-length ratio
    itermax_iters: int = 2
    itermax_decay: float = 0.9
    baseline_window: int = 128  # sliding-window size for baseline token embeddings
    baseline_stride: int = 64
    baseline_max_distance: int = 50  # drop word links further apart than this
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_align < 1:
            raise ValueError("max_align must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.itermax_iters < 1:
            raise ValueError("itermax_iters must be >= 1")
        if not 0 < self.itermax_decay <= 1:
            raise ValueError("itermax_decay must be in (0, 1]")

    @classmethod
    def from_dict(cls, values: dict) -> "AlignerParams":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown aligner parameter(s): {sorted(unknown)}")
        return cls(**values)
