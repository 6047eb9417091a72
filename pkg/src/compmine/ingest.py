"""Dataset parsing, normalization, linting, and summary statistics.

Owns the canonical JSONL file format and the character-index remapping that
keeps annotation spans attached to their text when special characters
(non-breaking spaces, zero-width marks) are cleaned away.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .core import (
    COMPARISON_LABELS,
    ELEMENT_KINDS,
    Dataset,
    Quintuple,
    Sentence,
    Token,
    TokenSpan,
    parse_label,
    tags_for_quintuples,
)
from .errors import OverlappingElements, ParseError, SpanRemapError, UnknownLabel

# Deleted outright during normalization.
ZERO_WIDTH = frozenset({"​", "﻿", "‌", "‍"})


@dataclass(frozen=True)
class IndexMap:
    """Monotone partial map from raw-text to normalized-text character indices.

    Characters deleted by normalization (zero-width marks, collapsed
    whitespace, trimmed ends) have no image.
    """

    raw_to_clean: dict[int, int]

    def get(self, raw_index: int) -> int | None:
        return self.raw_to_clean.get(raw_index)

    def remap_interval(self, start: int, end: int) -> tuple[int, int]:
        """Map a half-open raw char interval [start, end) to clean indices.

        Returns the tightest half-open clean interval covering the surviving
        characters. Raises SpanRemapError when every character was deleted.
        """
        survivors = [
            self.raw_to_clean[i] for i in range(start, end) if i in self.raw_to_clean
        ]
        if not survivors:
            raise SpanRemapError(
                f"raw chars [{start}, {end}) land entirely on deleted text"
            )
        return min(survivors), max(survivors) + 1


def normalize_text(raw: str) -> tuple[str, IndexMap]:
    """Clean special characters out of raw text, tracking index movement.

    Non-breaking spaces become plain spaces, zero-width characters are
    deleted, whitespace runs collapse to single spaces, and the ends are
    trimmed. Total function: any Unicode string normalizes.
    """
    chars: list[str] = []
    mapping: dict[int, int] = {}
    for i, ch in enumerate(raw):
        if ch in ZERO_WIDTH:
            continue
        if ch.isspace():
            if not chars or chars[-1] == " ":
                continue
            chars.append(" ")
        else:
            chars.append(ch)
        mapping[i] = len(chars) - 1
    if chars and chars[-1] == " ":
        chars.pop()
        mapping = {k: v for k, v in mapping.items() if v < len(chars)}
    return "".join(chars), IndexMap(mapping)


def tokenize(text: str) -> tuple[Token, ...]:
    """Whitespace tokens of a normalized text, with character offsets."""
    tokens = []
    pos = 0
    for part in text.split(" "):
        if part:
            tokens.append(Token(part, pos, pos + len(part)))
        pos += len(part) + 1
    return tuple(tokens)


def _raw_token_offsets(raw: str) -> list[tuple[int, int]]:
    """Half-open char offsets of whitespace-delimited chunks of raw text."""
    offsets = []
    start = None
    for i, ch in enumerate(raw):
        if ch.isspace():
            if start is not None:
                offsets.append((start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        offsets.append((start, len(raw)))
    return offsets


def _remap_token_index(
    raw_offsets: list[tuple[int, int]],
    clean_tokens: tuple[Token, ...],
    index_map: IndexMap,
    token_index: int,
) -> int:
    """Clean token index holding the surviving characters of a raw token."""
    if not (0 <= token_index < len(raw_offsets)):
        raise SpanRemapError(f"token index {token_index} out of range")
    lo, hi = raw_offsets[token_index]
    cs, ce = index_map.remap_interval(lo, hi)
    for j, tok in enumerate(clean_tokens):
        if tok.start < ce and cs < tok.end:
            return j
    raise SpanRemapError(f"token index {token_index} survives outside any token")


def _char_span_to_tokens(tokens: tuple[Token, ...], cs: int, ce: int) -> TokenSpan:
    """Token span covering a half-open clean character range."""
    hit = [i for i, t in enumerate(tokens) if t.start < ce and cs < t.end]
    if not hit:
        raise SpanRemapError(f"clean chars [{cs}, {ce}) cover no token")
    return TokenSpan(hit[0], hit[-1])


def _parse_slot(value, name: str) -> tuple[int, int] | None:
    if value is None:
        return None
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, int) for v in value)
    ):
        raise ValueError(f"{name} span must be null or a [start, end] pair")
    return value[0], value[1]


def _sentence_from_canonical(record: dict) -> Sentence:
    sid = record["id"]
    raw_text = record["text"]
    if not isinstance(sid, str) or not isinstance(raw_text, str):
        raise ValueError("id and text must be strings")
    clean, index_map = normalize_text(raw_text)
    tokens = tokenize(clean)
    raw_offsets = _raw_token_offsets(raw_text)
    identity = clean == raw_text

    quintuples = []
    for q in record.get("quintuples") or []:
        spans: dict[str, TokenSpan | None] = {}
        for kind in ELEMENT_KINDS:
            pair = _parse_slot(q.get(kind), kind)
            if pair is None:
                spans[kind] = None
                continue
            start, end = pair
            if start > end or start < 0:
                raise ValueError(f"{kind} span [{start}, {end}] is not a valid range")
            if not identity:
                start = _remap_token_index(raw_offsets, tokens, index_map, start)
                end = _remap_token_index(raw_offsets, tokens, index_map, end)
            if end >= len(tokens):
                raise ValueError(
                    f"{kind} span [{start}, {end}] exceeds token count {len(tokens)}"
                )
            spans[kind] = TokenSpan(start, end)
        quintuples.append(
            Quintuple(
                subject=spans["subject"],
                object=spans["object"],
                aspect=spans["aspect"],
                predicate=spans["predicate"],
                label=parse_label(q.get("label", "")),
            )
        )
    return Sentence(sid, clean, tokens, tuple(quintuples))


def _sentence_from_vlsp_raw(record: dict) -> Sentence:
    sid = record["id"]
    raw_text = record["text"]
    if not isinstance(sid, str) or not isinstance(raw_text, str):
        raise ValueError("id and text must be strings")
    clean, index_map = normalize_text(raw_text)
    tokens = tokenize(clean)

    quintuples = []
    for ann in record.get("annotations") or []:
        spans: dict[str, TokenSpan | None] = {}
        for kind in ELEMENT_KINDS:
            pair = _parse_slot(ann.get(kind), kind)
            if pair is None:
                spans[kind] = None
                continue
            cs, ce = pair
            if cs >= ce or cs < 0 or ce > len(raw_text):
                raise ValueError(
                    f"{kind} char span [{cs}, {ce}) is not a valid range"
                )
            clean_cs, clean_ce = index_map.remap_interval(cs, ce)
            spans[kind] = _char_span_to_tokens(tokens, clean_cs, clean_ce)
        quintuples.append(
            Quintuple(
                subject=spans["subject"],
                object=spans["object"],
                aspect=spans["aspect"],
                predicate=spans["predicate"],
                label=parse_label(ann.get("label", "")),
            )
        )
    return Sentence(sid, clean, tokens, tuple(quintuples))


_FORMATS = {
    "canonical-jsonl": _sentence_from_canonical,
    "vlsp-raw": _sentence_from_vlsp_raw,
}


def _read_records(path, format: str):
    if format not in _FORMATS:
        raise ValueError(f"unknown format {format!r}")
    build = _FORMATS[format]
    sentences = []
    bad: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("record must be a JSON object")
                sentences.append(build(record))
            except (KeyError, TypeError, ValueError, SpanRemapError, UnknownLabel) as exc:
                reason = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                bad.append((lineno, reason))
    return sentences, bad


def import_dataset(path, format: str = "canonical-jsonl", provenance: str = "") -> Dataset:
    """Read a dataset file, normalizing text and remapping annotation spans.

    Invalid records are collected and reported together in one ParseError
    (line number plus reason each) rather than silently dropped.
    """
    sentences, bad = _read_records(path, format)
    if bad:
        listing = "; ".join(f"line {n}: {r}" for n, r in bad)
        raise ParseError(f"{len(bad)} invalid record(s) in {path}: {listing}", bad)
    try:
        return Dataset(tuple(sentences), provenance=provenance)
    except ValueError as exc:
        raise ParseError(str(exc), []) from exc


def import_dataset_lenient(
    path, format: str = "canonical-jsonl", provenance: str = ""
) -> tuple[Dataset, list[tuple[int, str]]]:
    """Like import_dataset, but report invalid records instead of raising."""
    sentences, bad = _read_records(path, format)
    seen: set[str] = set()
    unique = []
    for s in sentences:
        if s.id in seen:
            bad.append((0, f"duplicate sentence id {s.id!r} dropped"))
            continue
        seen.add(s.id)
        unique.append(s)
    return Dataset(tuple(unique), provenance=provenance), sorted(bad)


def sentence_to_record(sentence: Sentence) -> dict:
    """Canonical JSONL object for one sentence, keys in fixed order."""
    quintuples = []
    for q in sentence.quintuples:
        quintuples.append(
            {
                kind: ([span.start, span.end] if span is not None else None)
                for kind, span in zip(ELEMENT_KINDS, q.spans())
            }
            | {"label": q.label}
        )
    return {"id": sentence.id, "text": sentence.text, "quintuples": quintuples}


def export_dataset(dataset: Dataset, path) -> None:
    """Write canonical JSONL, one sentence per line, byte-stable."""
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in dataset:
            fh.write(json.dumps(sentence_to_record(sentence), ensure_ascii=False,
                                separators=(",", ":")))
            fh.write("\n")


# -- lint ----------------------------------------------------------------


@dataclass(frozen=True)
class LintConfig:
    max_predicate_tokens: int = 10


@dataclass(frozen=True)
class LintFinding:
    rule: str
    sentence_id: str
    detail: str


@dataclass(frozen=True)
class LintReport:
    findings: tuple[LintFinding, ...]

    def __bool__(self) -> bool:
        return bool(self.findings)

    def to_json(self) -> list[dict]:
        return [
            {"rule": f.rule, "sentence_id": f.sentence_id, "detail": f.detail}
            for f in self.findings
        ]

    def to_text(self) -> str:
        if not self.findings:
            return "no findings\n"
        width = max(len(f.sentence_id) for f in self.findings)
        lines = [
            f"{f.rule}  {f.sentence_id:<{width}}  {f.detail}" for f in self.findings
        ]
        return "\n".join(lines) + "\n"


def lint_dataset(dataset: Dataset, config: LintConfig = LintConfig()) -> LintReport:
    """Flag suspicious annotations for human review.

    R1: predicate spans longer than config.max_predicate_tokens.
    R2: comparative sentence with a quintuple that has no predicate, or
        element spans of different kinds overlapping.
    R3: duplicate quintuples (identical five fields) within one sentence.
    """
    findings = []
    for s in dataset:
        for q in s.quintuples:
            if q.predicate is not None and len(q.predicate) > config.max_predicate_tokens:
                findings.append(
                    LintFinding(
                        "R1",
                        s.id,
                        f"predicate spans {len(q.predicate)} tokens "
                        f"(limit {config.max_predicate_tokens}): "
                        f"{s.span_text(q.predicate)!r}",
                    )
                )
            if q.predicate is None:
                findings.append(
                    LintFinding("R2", s.id, f"quintuple missing predicate: {q.label}")
                )
        try:
            tags_for_quintuples(s)
        except OverlappingElements as exc:
            findings.append(LintFinding("R2", s.id, str(exc)))
        seen: set[Quintuple] = set()
        for q in s.quintuples:
            if q in seen:
                findings.append(LintFinding("R3", s.id, f"duplicate quintuple: {q.label}"))
            seen.add(q)
    findings.sort(key=lambda f: (f.sentence_id, f.rule, f.detail))
    return LintReport(tuple(findings))


# -- stats ---------------------------------------------------------------


@dataclass(frozen=True)
class StatsReport:
    """Exact counts for a dataset; percentages derive from them on demand."""

    total_sentences: int
    comparative: int
    non_comparative: int
    mono_comparative: int
    multi_comparative: int
    total_quintuples: int
    label_counts: dict[str, int] = field(default_factory=dict)
    element_counts: dict[str, int] = field(default_factory=dict)

    @staticmethod
    def _pct(part: int, whole: int) -> float:
        return 100.0 * part / whole if whole else 0.0

    def percentages(self) -> dict[str, float]:
        out = {
            "comparative": self._pct(self.comparative, self.total_sentences),
            "non_comparative": self._pct(self.non_comparative, self.total_sentences),
            "mono_comparative": self._pct(self.mono_comparative, self.comparative),
            "multi_comparative": self._pct(self.multi_comparative, self.comparative),
        }
        for label in COMPARISON_LABELS:
            out[label] = self._pct(self.label_counts[label], self.total_quintuples)
        return out

    def to_json(self) -> dict:
        return {
            "sentences": {
                "total": self.total_sentences,
                "comparative": self.comparative,
                "non_comparative": self.non_comparative,
                "mono_comparative": self.mono_comparative,
                "multi_comparative": self.multi_comparative,
            },
            "quintuples": {"total": self.total_quintuples, "by_label": dict(self.label_counts)},
            "elements": dict(self.element_counts),
            "percentages": {k: round(v, 2) for k, v in self.percentages().items()},
        }

    def to_text(self) -> str:
        pct = self.percentages()
        rows = [
            ("Comparative", self.comparative, pct["comparative"]),
            ("Non-comparative", self.non_comparative, pct["non_comparative"]),
            ("Mono-comparative", self.mono_comparative, pct["mono_comparative"]),
            ("Multi-comparative", self.multi_comparative, pct["multi_comparative"]),
        ]
        rows += [(label, self.label_counts[label], pct[label]) for label in COMPARISON_LABELS]
        lines = [f"{'Type':<18}{'Number':>8}  {'Percent':>8}"]
        lines += [f"{name:<18}{count:>8}  {p:>7.2f}%" for name, count, p in rows]
        lines.append("")
        lines.append(f"{'Element':<18}{'Number':>8}")
        for kind in ELEMENT_KINDS:
            lines.append(f"{kind.capitalize() + ' entity':<18}{self.element_counts[kind]:>8}")
        return "\n".join(lines) + "\n"


def dataset_stats(dataset: Dataset) -> StatsReport:
    """Count sentences, quintuples per label, and element occurrences."""
    comparative = multi = 0
    label_counts = {label: 0 for label in COMPARISON_LABELS}
    element_counts = {kind: 0 for kind in ELEMENT_KINDS}
    total_quintuples = 0
    for s in dataset:
        if s.is_comparative:
            comparative += 1
            if len(s.quintuples) >= 2:
                multi += 1
        for q in s.quintuples:
            total_quintuples += 1
            label_counts[q.label] += 1
            for kind, _ in q.elements():
                element_counts[kind] += 1
    total = len(dataset)
    return StatsReport(
        total_sentences=total,
        comparative=comparative,
        non_comparative=total - comparative,
        mono_comparative=comparative - multi,
        multi_comparative=multi,
        total_quintuples=total_quintuples,
        label_counts=label_counts,
        element_counts=element_counts,
    )
