"""spanalign: a workbench for span/word-level alignment of interpreted speech.

Validates and stores annotations between a source transcript and its
interpretation, runs the automatic alignment pipeline and baselines,
scores hypotheses, reproduces the corpus analyses, and serves the
annotation HTTP API.
"""

from .model import (
    AlignmentDocument,
    DocumentMeta,
    Span,
    SpanLabel,
    SpanLink,
    Token,
    TranscriptSide,
    WordLink,
)
from .tokenizer import TranscriptParseError, parse_transcript, tokenize
from .validation import ValidationReport, validate_document
from .serialization import SerializationError, deserialize, serialize

__version__ = "0.1.0"

__all__ = [
    "AlignmentDocument",
    "DocumentMeta",
    "Span",
    "SpanLabel",
    "SpanLink",
    "Token",
    "TranscriptSide",
    "WordLink",
    "TranscriptParseError",
    "parse_transcript",
    "tokenize",
    "ValidationReport",
    "validate_document",
    "SerializationError",
    "deserialize",
    "serialize",
    "__version__",
]
