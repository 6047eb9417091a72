"""Domain types shared by every pipeline stage.

Comparison labels, token spans, quintuples, sentences, datasets, the fixed
9-tag BIO alphabet, and logit containers. Everything here is immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OverlappingElements, UnknownLabel

# The eight comparison labels, in fixed report order.
COMPARISON_LABELS: tuple[str, ...] = (
    "DIF",
    "EQL",
    "SUP+",
    "SUP-",
    "SUP",
    "COM+",
    "COM-",
    "COM",
)

# Sentinel used only by the stage-3 classifier; never emitted in quintuples.
NONE_LABEL = "NONE"

# Stage-3 alphabet: the eight labels followed by the rejection class.
STAGE_LABELS: tuple[str, ...] = COMPARISON_LABELS + (NONE_LABEL,)

# The four element kinds, in slot order (subject, object, aspect, predicate).
ELEMENT_KINDS: tuple[str, ...] = ("subject", "object", "aspect", "predicate")

_KIND_ABBREV = {"subject": "SUB", "object": "OBJ", "aspect": "ASP", "predicate": "PRED"}

# Fixed 9-tag BIO alphabet with integer ids 0..8.
TAG_NAMES: tuple[str, ...] = (
    "O",
    "B-SUB",
    "I-SUB",
    "B-OBJ",
    "I-OBJ",
    "B-ASP",
    "I-ASP",
    "B-PRED",
    "I-PRED",
)
TAG_IDS: dict[str, int] = {name: i for i, name in enumerate(TAG_NAMES)}
NUM_TAGS = len(TAG_NAMES)
NUM_STAGE_LABELS = len(STAGE_LABELS)

_LABEL_SET = frozenset(COMPARISON_LABELS)


def parse_label(text: str) -> str:
    """Return the comparison label for an exact, case-sensitive match.

    Raises UnknownLabel for anything outside the eight-value alphabet,
    which signals a corrupt input file.
    """
    if text in _LABEL_SET:
        return text
    raise UnknownLabel(f"not a comparison label: {text!r}")


def label_index(label: str) -> int:
    """Fixed position of a comparison label in report order."""
    return COMPARISON_LABELS.index(parse_label(label))


def begin_tag(kind: str) -> int:
    """Tag id of B-<kind>."""
    return TAG_IDS["B-" + _KIND_ABBREV[kind]]


def inside_tag(kind: str) -> int:
    """Tag id of I-<kind>."""
    return TAG_IDS["I-" + _KIND_ABBREV[kind]]


@dataclass(frozen=True, order=True)
class TokenSpan:
    """Inclusive token-index range [start, end] within one sentence."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start <= self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def tokens(self) -> range:
        return range(self.start, self.end + 1)

    def overlaps(self, other: "TokenSpan") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass(frozen=True)
class Quintuple:
    """One comparison: four optional element spans plus a comparison label."""

    subject: TokenSpan | None
    object: TokenSpan | None
    aspect: TokenSpan | None
    predicate: TokenSpan | None
    label: str

    def __post_init__(self) -> None:
        parse_label(self.label)
        if all(s is None for s in self.spans()):
            raise ValueError("quintuple must fill at least one element slot")

    def spans(self) -> tuple[TokenSpan | None, TokenSpan | None, TokenSpan | None, TokenSpan | None]:
        return (self.subject, self.object, self.aspect, self.predicate)

    def elements(self) -> list[tuple[str, TokenSpan]]:
        """(kind, span) pairs for the slots that are present."""
        return [(k, s) for k, s in zip(ELEMENT_KINDS, self.spans()) if s is not None]

    def get(self, kind: str) -> TokenSpan | None:
        return self.spans()[ELEMENT_KINDS.index(kind)]

    def max_token(self) -> int:
        return max(s.end for s in self.spans() if s is not None)


@dataclass(frozen=True)
class Token:
    """Surface form plus half-open character offsets into the sentence text."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Sentence:
    """A normalized sentence with its tokens and gold or predicted quintuples.

    Tokens tile the text in order (single spaces between them); every
    quintuple span must lie inside the token list. A sentence is
    comparative iff it carries at least one quintuple.
    """

    id: str
    text: str
    tokens: tuple[Token, ...]
    quintuples: tuple[Quintuple, ...] = ()

    def __post_init__(self) -> None:
        prev_end = None
        for tok in self.tokens:
            if not tok.text or tok.text != self.text[tok.start : tok.end]:
                raise ValueError(f"sentence {self.id}: token {tok!r} does not match text")
            if prev_end is not None and tok.start < prev_end:
                raise ValueError(f"sentence {self.id}: tokens overlap")
            prev_end = tok.end
        n = len(self.tokens)
        for q in self.quintuples:
            if q.max_token() >= n:
                raise ValueError(
                    f"sentence {self.id}: span beyond token count {n}: {q}"
                )

    @property
    def is_comparative(self) -> bool:
        return bool(self.quintuples)

    def __len__(self) -> int:
        return len(self.tokens)

    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def span_text(self, span: TokenSpan) -> str:
        return self.text[self.tokens[span.start].start : self.tokens[span.end].end]


def sentence_from_tokens(
    sid: str, token_texts: list[str], quintuples: tuple[Quintuple, ...] = ()
) -> Sentence:
    """Build a sentence whose text is the tokens joined by single spaces."""
    toks = []
    pos = 0
    for t in token_texts:
        toks.append(Token(t, pos, pos + len(t)))
        pos += len(t) + 1
    return Sentence(sid, " ".join(token_texts), tuple(toks), quintuples)


@dataclass(frozen=True)
class Dataset:
    """Ordered sentence collection with a provenance note."""

    sentences: tuple[Sentence, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for s in self.sentences:
            if s.id in seen:
                raise ValueError(f"duplicate sentence id {s.id!r}")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def by_id(self) -> dict[str, Sentence]:
        return {s.id: s for s in self.sentences}

    def comparative(self) -> list[Sentence]:
        return [s for s in self.sentences if s.is_comparative]


def check_logits(vec: np.ndarray, width: int) -> np.ndarray:
    """Validate a logit vector (or row-major batch of them) of a given width."""
    arr = np.asarray(vec, dtype=float)
    if arr.shape[-1] != width:
        raise ValueError(f"logit width {arr.shape[-1]} != alphabet size {width}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("logits must be finite")
    return arr


def tags_for_quintuples(sentence: Sentence) -> list[int]:
    """Project a sentence's quintuple spans onto the 9-tag BIO alphabet.

    Tokens covered by no element get O. Within each element kind the covered
    tokens are merged and each contiguous run is tagged B then I. A token
    claimed by two different kinds raises OverlappingElements (data needing
    lint review); same-kind spans from different quintuples may coincide.
    """
    n = len(sentence)
    covered: dict[str, set[int]] = {k: set() for k in ELEMENT_KINDS}
    for q in sentence.quintuples:
        for kind, span in q.elements():
            covered[kind].update(span.tokens())

    owner: dict[int, str] = {}
    for kind in ELEMENT_KINDS:
        for i in covered[kind]:
            if i in owner and owner[i] != kind:
                raise OverlappingElements(
                    f"sentence {sentence.id}: token {i} tagged both {owner[i]} and {kind}"
                )
            owner[i] = kind

    tags = [TAG_IDS["O"]] * n
    for kind in ELEMENT_KINDS:
        run_open = False
        for i in range(n):
            if i in covered[kind]:
                tags[i] = inside_tag(kind) if run_open else begin_tag(kind)
                run_open = True
            else:
                run_open = False
    return tags
