"""Span-annotation toolkit for fragment- and sentence-level propaganda detection."""

from propspan.spans import (
    NONE_LABEL,
    AnnotationSet,
    Fragment,
    LabelInventory,
    SentenceIndex,
    SpanError,
    fragment_from_token_run,
    overlap_length,
)

__all__ = [
    "NONE_LABEL",
    "AnnotationSet",
    "Fragment",
    "LabelInventory",
    "SentenceIndex",
    "SpanError",
    "fragment_from_token_run",
    "overlap_length",
]

__version__ = "0.1.0"
