"""BIO decoding into element sets and Cartesian quadruple generation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import ELEMENT_KINDS, NUM_TAGS, TAG_NAMES, TokenSpan
from .errors import AllSetsEmpty

_KIND_FOR_ABBREV = {"SUB": "subject", "OBJ": "object", "ASP": "aspect", "PRED": "predicate"}

DEFAULT_QUADRUPLE_CAP = 256


@dataclass(frozen=True)
class ElementSets:
    """The four extracted span sets feeding quadruple generation."""

    subjects: frozenset[TokenSpan] = frozenset()
    objects: frozenset[TokenSpan] = frozenset()
    aspects: frozenset[TokenSpan] = frozenset()
    predicates: frozenset[TokenSpan] = frozenset()

    def __post_init__(self) -> None:
        for kind in ELEMENT_KINDS:
            spans = sorted(self.by_kind(kind))
            for a, b in zip(spans, spans[1:]):
                if a.overlaps(b):
                    raise ValueError(f"{kind} spans {a} and {b} overlap")

    def by_kind(self, kind: str) -> frozenset[TokenSpan]:
        return {
            "subject": self.subjects,
            "object": self.objects,
            "aspect": self.aspects,
            "predicate": self.predicates,
        }[kind]

    def any_present(self) -> bool:
        return bool(self.subjects or self.objects or self.aspects or self.predicates)

    def combination_count(self) -> int:
        count = 1
        for kind in ELEMENT_KINDS:
            count *= max(1, len(self.by_kind(kind)))
        return count


def element_sets_of(sentence) -> ElementSets:
    """Gold element sets of a sentence: the union of its quintuple spans."""
    collected: dict[str, set[TokenSpan]] = {k: set() for k in ELEMENT_KINDS}
    for q in sentence.quintuples:
        for kind, span in q.elements():
            collected[kind].add(span)
    return ElementSets(
        subjects=frozenset(collected["subject"]),
        objects=frozenset(collected["object"]),
        aspects=frozenset(collected["aspect"]),
        predicates=frozenset(collected["predicate"]),
    )


def decode_spans(tags_or_logits) -> ElementSets:
    """Lenient BIO decoding of per-token tags or width-9 logit rows.

    Logits are argmaxed per token with ties broken toward the lower tag id,
    so O wins an exact tie. B starts a span; I continues a same-kind span;
    an I after O or after a different kind starts a new span of its own kind.
    """
    arr = np.asarray(tags_or_logits)
    if arr.ndim == 2:
        if arr.shape[1] != NUM_TAGS:
            raise ValueError(f"expected width-{NUM_TAGS} logits, got {arr.shape}")
        tags = [int(t) for t in arr.argmax(axis=1)]
    else:
        tags = [int(t) for t in arr]

    spans: dict[str, list[TokenSpan]] = {k: [] for k in ELEMENT_KINDS}
    open_kind: str | None = None
    start = 0

    def close(upto: int) -> None:
        nonlocal open_kind
        if open_kind is not None:
            spans[open_kind].append(TokenSpan(start, upto))
            open_kind = None

    for i, tag in enumerate(tags):
        name = TAG_NAMES[tag]
        if name == "O":
            close(i - 1)
            continue
        marker, abbrev = name.split("-")
        kind = _KIND_FOR_ABBREV[abbrev]
        if marker == "B" or kind != open_kind:
            close(i - 1)
            open_kind = kind
            start = i
    close(len(tags) - 1)

    return ElementSets(
        subjects=frozenset(spans["subject"]),
        objects=frozenset(spans["object"]),
        aspects=frozenset(spans["aspect"]),
        predicates=frozenset(spans["predicate"]),
    )


def generate_quadruples(
    sets: ElementSets, cap: int = DEFAULT_QUADRUPLE_CAP
) -> tuple[list[tuple[TokenSpan | None, ...]], bool]:
    """All slot combinations of the element sets, subject-major order.

    An empty set contributes a single absent value for its slot, since gold
    tuples legitimately omit elements. Returns (quadruples, truncated);
    generation stops at cap rather than exploding on pathological taggings.
    """
    if not sets.any_present():
        raise AllSetsEmpty("all four element sets are empty")
    choices = []
    for kind in ELEMENT_KINDS:
        spans = sorted(sets.by_kind(kind))
        choices.append(spans if spans else [None])
    total = sets.combination_count()
    quads = list(itertools.islice(itertools.product(*choices), cap))
    return quads, total > cap
