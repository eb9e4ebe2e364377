from .baselines import baseline_word_align, random_baseline
from .coarse import AlignerError, Bead, coarse_align
from .embeddings import fallback_embed, similarity_matrix
from .itermax import itermax_word_align, mutual_argmax
from .params import AlignerParams
from .pipeline import SpanAligner, run_pipeline
from .subsegment import sub_segment

__all__ = [
    "AlignerError",
    "AlignerParams",
    "Bead",
    "SpanAligner",
    "baseline_word_align",
    "coarse_align",
    "fallback_embed",
    "itermax_word_align",
    "mutual_argmax",
    "random_baseline",
    "run_pipeline",
    "similarity_matrix",
    "sub_segment",
]
