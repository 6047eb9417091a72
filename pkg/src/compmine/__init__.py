"""Comparative opinion mining toolkit.

Three-stage quintuple extraction for product-review sentences (comparative
sentence identification, element span extraction, comparison-type
classification) together with dataset cleaning, dictionary-substitution
augmentation, bootstrap and weighted ensembling, and tuple-level
macro-F1 evaluation.
"""

__version__ = "0.1.0"

from .core import (
    COMPARISON_LABELS,
    ELEMENT_KINDS,
    NONE_LABEL,
    STAGE_LABELS,
    TAG_IDS,
    TAG_NAMES,
    Dataset,
    Quintuple,
    Sentence,
    Token,
    TokenSpan,
    parse_label,
    sentence_from_tokens,
    tags_for_quintuples,
)

__all__ = [
    "COMPARISON_LABELS",
    "ELEMENT_KINDS",
    "NONE_LABEL",
    "STAGE_LABELS",
    "TAG_IDS",
    "TAG_NAMES",
    "Dataset",
    "Quintuple",
    "Sentence",
    "Token",
    "TokenSpan",
    "parse_label",
    "sentence_from_tokens",
    "tags_for_quintuples",
    "__version__",
]
