"""Canonical JSONL reading and BIO projection against the file contract.

The dataset format is the pipeline toolkit's documented interchange format:
one JSON object per line with id, text, and quintuples holding inclusive
token-index span pairs plus a comparison label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import COMPARISON_LABELS, STAGE_LABELS, TAG_NAMES

_TAG_IDS = {name: i for i, name in enumerate(TAG_NAMES)}
_SLOT_ABBREV = {"subject": "SUB", "object": "OBJ", "aspect": "ASP", "predicate": "PRED"}
SLOTS = ("subject", "object", "aspect", "predicate")


@dataclass(frozen=True)
class Example:
    sid: str
    tokens: tuple[str, ...]
    quintuples: tuple[dict, ...]  # slot -> (start, end) | None, plus "label"

    @property
    def comparative(self) -> bool:
        return bool(self.quintuples)


def read_dataset(path) -> list[Example]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            tokens = tuple(record["text"].split(" ")) if record["text"] else ()
            quintuples = []
            for q in record.get("quintuples") or []:
                if q["label"] not in COMPARISON_LABELS:
                    raise ValueError(f"line {lineno}: unknown label {q['label']!r}")
                parsed = {"label": q["label"]}
                for slot in SLOTS:
                    pair = q.get(slot)
                    if pair is None:
                        parsed[slot] = None
                        continue
                    start, end = int(pair[0]), int(pair[1])
                    if not (0 <= start <= end < len(tokens)):
                        raise ValueError(f"line {lineno}: {slot} span {pair} out of bounds")
                    parsed[slot] = (start, end)
                quintuples.append(parsed)
            examples.append(Example(record["id"], tokens, tuple(quintuples)))
    return examples


def bio_tags(example: Example) -> list[int]:
    """Project quintuple spans to per-word tag ids; O everywhere else."""
    covered: dict[str, set[int]] = {slot: set() for slot in SLOTS}
    for q in example.quintuples:
        for slot in SLOTS:
            span = q[slot]
            if span is not None:
                covered[slot].update(range(span[0], span[1] + 1))
    tags = [_TAG_IDS["O"]] * len(example.tokens)
    for slot in SLOTS:
        abbrev = _SLOT_ABBREV[slot]
        run = False
        for i in range(len(example.tokens)):
            if i in covered[slot]:
                tags[i] = _TAG_IDS[("I-" if run else "B-") + abbrev]
                run = True
            else:
                run = False
    return tags


def quadruple_examples(example: Example, max_negatives: int | None = None):
    """(quad, stage-label-id) pairs: gold tuples plus shifted NONE negatives."""
    none_id = STAGE_LABELS.index("NONE")
    gold = {}
    for q in example.quintuples:
        quad = tuple(q[slot] for slot in SLOTS)
        gold[quad] = STAGE_LABELS.index(q["label"])
    out = list(gold.items())
    negatives = []
    n = len(example.tokens)
    for quad in gold:
        shifted = []
        ok = True
        for span in quad:
            if span is None:
                shifted.append(None)
            elif span[1] + 1 < n:
                shifted.append((span[0] + 1, span[1] + 1))
            else:
                ok = False
                break
        if ok and tuple(shifted) not in gold:
            negatives.append((tuple(shifted), none_id))
    if max_negatives is None:
        max_negatives = max(1, len(gold))
    out.extend(negatives[:max_negatives])
    return out
