"""Dictionary-substitution augmentation.

Builds element dictionaries from gold data plus external wordlists, then
synthesizes labeled comparative sentences by replacing element spans with
dictionary phrases. A synthesized quintuple's label always follows the
bucket its predicate replacement was drawn from, which is what lets skewed
source data be rebalanced to exact per-label targets.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field, replace

from .core import (
    COMPARISON_LABELS,
    ELEMENT_KINDS,
    Dataset,
    Quintuple,
    Sentence,
    TokenSpan,
    parse_label,
    sentence_from_tokens,
)
from .errors import (
    EmptyCorpus,
    MissingLabel,
    OverlappingElements,
    SlotUnavailable,
    TargetUnreachable,
)
from .ingest import normalize_text

# Published combined (original + synthetic) per-label quintuple counts for
# the two rebalanced dataset versions.
V2_COMBINED_TARGETS = {
    "DIF": 410, "EQL": 1788, "SUP+": 334, "SUP-": 288,
    "SUP": 308, "COM+": 2980, "COM-": 854, "COM": 346,
}
V3_COMBINED_TARGETS = {
    "DIF": 536, "EQL": 557, "SUP+": 597, "SUP-": 610,
    "SUP": 545, "COM+": 770, "COM-": 597, "COM": 638,
}
VERSION_TARGETS = {"v2": V2_COMBINED_TARGETS, "v3": V3_COMBINED_TARGETS}


@dataclass(frozen=True)
class ElementDictionaries:
    """Slot-indexed phrase lists; predicates bucketed by comparison label."""

    subjects: tuple[str, ...] = ()
    objects: tuple[str, ...] = ()
    aspects: tuple[str, ...] = ()
    predicates: dict[str, tuple[str, ...]] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def slot(self, kind: str) -> tuple[str, ...]:
        if kind == "subject":
            return self.subjects
        if kind == "object":
            return self.objects
        if kind == "aspect":
            return self.aspects
        raise ValueError(f"no plain slot {kind!r}")

    def predicate_labels(self) -> list[str]:
        """Labels whose predicate bucket is non-empty, in fixed order."""
        return [l for l in COMPARISON_LABELS if self.predicates.get(l)]

    def to_json(self) -> dict:
        return {
            "subjects": list(self.subjects),
            "objects": list(self.objects),
            "aspects": list(self.aspects),
            "predicates": {l: list(v) for l, v in self.predicates.items()},
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ElementDictionaries":
        return cls(
            subjects=tuple(obj.get("subjects", ())),
            objects=tuple(obj.get("objects", ())),
            aspects=tuple(obj.get("aspects", ())),
            predicates={l: tuple(v) for l, v in obj.get("predicates", {}).items()},
            warnings=tuple(obj.get("warnings", ())),
        )


def _normalize_phrases(entries) -> list[str]:
    out = []
    for e in entries:
        clean, _ = normalize_text(e)
        if clean:
            out.append(clean)
    return out


def _dedup(existing: tuple[str, ...], new: list[str]) -> tuple[str, ...]:
    merged = list(existing)
    seen = set(existing)
    for e in new:
        if e not in seen:
            merged.append(e)
            seen.add(e)
    return tuple(merged)


def build_dictionaries(dataset: Dataset) -> ElementDictionaries:
    """Isolate every gold element surface phrase into its slot list.

    Predicates are bucketed by the label of their owning quintuple; a phrase
    surfacing under two labels stays in both buckets and is reported in the
    warnings list for review.
    """
    comparative = dataset.comparative()
    if not comparative:
        raise EmptyCorpus("no comparative sentences to build dictionaries from")

    plain: dict[str, list[str]] = {"subject": [], "object": [], "aspect": []}
    buckets: dict[str, list[str]] = {}
    phrase_labels: dict[str, list[str]] = {}
    for s in comparative:
        for q in s.quintuples:
            for kind, span in q.elements():
                phrase = s.span_text(span)
                if kind == "predicate":
                    buckets.setdefault(q.label, []).append(phrase)
                    labels = phrase_labels.setdefault(phrase, [])
                    if q.label not in labels:
                        labels.append(q.label)
                else:
                    plain[kind].append(phrase)

    warnings = tuple(
        f"predicate {phrase!r} appears under labels {', '.join(labels)}"
        for phrase, labels in sorted(phrase_labels.items())
        if len(labels) > 1
    )
    return ElementDictionaries(
        subjects=_dedup((), _normalize_phrases(plain["subject"])),
        objects=_dedup((), _normalize_phrases(plain["object"])),
        aspects=_dedup((), _normalize_phrases(plain["aspect"])),
        predicates={
            label: _dedup((), _normalize_phrases(buckets[label]))
            for label in COMPARISON_LABELS
            if label in buckets
        },
        warnings=warnings,
    )


def merge_wordlist(
    dicts: ElementDictionaries,
    slot: str,
    entries,
    label: str | None = None,
) -> ElementDictionaries:
    """Fold external wordlist entries into one slot, deduplicated.

    Predicate entries must carry the comparison label of their bucket; the
    substitution rule needs it to relabel synthesized sentences.
    """
    cleaned = _normalize_phrases(entries)
    if slot == "predicate":
        if label is None:
            raise MissingLabel("predicate entries need a comparison label")
        label = parse_label(label)
        predicates = dict(dicts.predicates)
        predicates[label] = _dedup(predicates.get(label, ()), cleaned)
        return replace(dicts, predicates=predicates)
    if slot == "subject":
        return replace(dicts, subjects=_dedup(dicts.subjects, cleaned))
    if slot == "object":
        return replace(dicts, objects=_dedup(dicts.objects, cleaned))
    if slot == "aspect":
        return replace(dicts, aspects=_dedup(dicts.aspects, cleaned))
    raise ValueError(f"unknown slot {slot!r}")


def load_wordlist(path) -> list[str]:
    """One phrase per line; blank lines and '#' comment lines ignored."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                entries.append(line)
    return entries


@dataclass(frozen=True)
class AugmentSpec:
    """Per-label synthetic quintuple targets plus generation controls."""

    targets: dict[str, int]
    seed: int = 0
    max_attempts: int = 1000

    def __post_init__(self) -> None:
        for label, count in self.targets.items():
            parse_label(label)
            if count < 0:
                raise ValueError(f"target for {label} must be >= 0")
        if not any(self.targets.values()):
            raise ValueError("at least one label must be targeted")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    def to_json(self) -> dict:
        return {"targets": dict(self.targets), "seed": self.seed,
                "max_attempts": self.max_attempts}

    @classmethod
    def from_json(cls, obj: dict) -> "AugmentSpec":
        return cls(
            targets={k: int(v) for k, v in obj["targets"].items()},
            seed=int(obj.get("seed", 0)),
            max_attempts=int(obj.get("max_attempts", 1000)),
        )

    @classmethod
    def load(cls, path) -> "AugmentSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def version_spec(version: str, source: Dataset, seed: int = 0,
                 max_attempts: int = 1000) -> AugmentSpec:
    """Synthetic targets that bring a source corpus up to a published version.

    Targets are combined-count tables minus what the source already holds;
    a source exceeding a published count cannot be thinned down and raises
    TargetUnreachable.
    """
    if version not in VERSION_TARGETS:
        raise ValueError(f"unknown dataset version {version!r}")
    combined = VERSION_TARGETS[version]
    have = Counter(q.label for s in source for q in s.quintuples)
    targets = {}
    for label, goal in combined.items():
        if have[label] > goal:
            raise TargetUnreachable(
                f"source already has {have[label]} {label} quintuples, "
                f"over the {version} target {goal}"
            )
        targets[label] = goal - have[label]
    return AugmentSpec(targets=targets, seed=seed, max_attempts=max_attempts)


def _substitution_regions(sentence: Sentence) -> dict[TokenSpan, str]:
    """Unique element regions to replace, keyed by span, valued by kind.

    Distinct regions must not overlap: a token claimed by two different
    replacement phrases has no consistent rewrite.
    """
    regions: dict[TokenSpan, str] = {}
    for q in sentence.quintuples:
        for kind, span in q.elements():
            prior = regions.get(span)
            if prior is not None and prior != kind:
                raise OverlappingElements(
                    f"sentence {sentence.id}: span {span} used as {prior} and {kind}"
                )
            regions[span] = kind
    ordered = sorted(regions)
    for a, b in zip(ordered, ordered[1:]):
        if a.overlaps(b):
            raise OverlappingElements(
                f"sentence {sentence.id}: regions {a} and {b} overlap"
            )
    return regions


def synthesize_sentence(
    template: Sentence,
    dicts: ElementDictionaries,
    rng: random.Random,
    sid: str | None = None,
    allowed_labels: list[str] | None = None,
) -> Sentence:
    """Replace a comparative template's element spans with dictionary phrases.

    Each unique element region gets one uniformly drawn replacement; a
    predicate replacement is drawn by first picking a label bucket uniformly
    (restricted to allowed_labels when given) and then a phrase within it.
    Every quintuple's label becomes its predicate's bucket label; quintuples
    without a predicate keep the template label. Spans are re-indexed for the
    new token lengths.
    """
    if not template.is_comparative:
        raise ValueError("template must be comparative")
    regions = _substitution_regions(template)

    replacements: dict[TokenSpan, list[str]] = {}
    region_label: dict[TokenSpan, str] = {}
    for span in sorted(regions):
        kind = regions[span]
        if kind == "predicate":
            labels = dicts.predicate_labels()
            if allowed_labels is not None:
                labels = [l for l in labels if l in allowed_labels]
            if not labels:
                raise SlotUnavailable("no predicate bucket available")
            label = labels[rng.randrange(len(labels))]
            bucket = dicts.predicates[label]
            replacements[span] = bucket[rng.randrange(len(bucket))].split(" ")
            region_label[span] = label
        else:
            choices = dicts.slot(kind)
            if not choices:
                raise SlotUnavailable(f"no {kind} phrases available")
            replacements[span] = choices[rng.randrange(len(choices))].split(" ")

    new_tokens: list[str] = []
    new_span: dict[TokenSpan, TokenSpan] = {}
    starts = {span.start: span for span in regions}
    i = 0
    old = template.token_texts()
    while i < len(old):
        span = starts.get(i)
        if span is None:
            new_tokens.append(old[i])
            i += 1
            continue
        phrase = replacements[span]
        new_span[span] = TokenSpan(len(new_tokens), len(new_tokens) + len(phrase) - 1)
        new_tokens.extend(phrase)
        i = span.end + 1

    quintuples = []
    for q in template.quintuples:
        slots = {kind: None for kind in ELEMENT_KINDS}
        label = q.label
        for kind, span in q.elements():
            slots[kind] = new_span[span]
            if kind == "predicate":
                label = region_label[span]
        quintuples.append(
            Quintuple(slots["subject"], slots["object"], slots["aspect"],
                      slots["predicate"], label)
        )
    return sentence_from_tokens(sid or f"{template.id}-syn", new_tokens,
                                tuple(quintuples))


def generate_dataset(source: Dataset, dicts: ElementDictionaries,
                     spec: AugmentSpec) -> Dataset:
    """Append synthetic sentences to the source until per-label targets hit.

    Templates are drawn uniformly from the source's comparative sentences
    with the seeded generator; predicate buckets are restricted to labels
    still below target. A candidate that would overshoot any label is
    discarded whole and resampled, keeping sentences internally consistent.
    Deterministic for fixed (source, dicts, spec).
    """
    templates = source.comparative()
    if not templates:
        raise EmptyCorpus("no comparative sentences to use as templates")

    remaining = {l: c for l, c in spec.targets.items() if c > 0}
    rng = random.Random(spec.seed)
    synthetic: list[Sentence] = []
    attempts = 0
    counter = 0
    while remaining:
        if attempts >= spec.max_attempts:
            raise TargetUnreachable(
                f"still need {remaining} after {attempts} rejected attempts; "
                "check that every targeted label has predicate phrases"
            )
        template = templates[rng.randrange(len(templates))]
        needed = [l for l in COMPARISON_LABELS if remaining.get(l)]
        try:
            candidate = synthesize_sentence(
                template, dicts, rng, sid=f"syn-{spec.seed}-{counter:06d}",
                allowed_labels=needed,
            )
        except (SlotUnavailable, OverlappingElements):
            attempts += 1
            continue
        counts = Counter(q.label for q in candidate.quintuples)
        if any(counts[l] > remaining.get(l, 0) for l in counts):
            attempts += 1
            continue
        synthetic.append(candidate)
        counter += 1
        attempts = 0
        for label, c in counts.items():
            remaining[label] -= c
            if remaining[label] == 0:
                del remaining[label]

    provenance = (source.provenance + "; " if source.provenance else "") + (
        f"augmented seed={spec.seed} targets={json.dumps(spec.targets, sort_keys=True)}"
    )
    return Dataset(tuple(source.sentences) + tuple(synthetic), provenance=provenance)
