"""Tuple-level scoring and per-stage diagnostics.

The headline metric scores predictions as exact five-field matches (four
spans plus the label), macro-averaged over comparison types. Stage
diagnostics score the comparative gate as binary classification and span
extraction as exact span matching per element kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import COMPARISON_LABELS, ELEMENT_KINDS, Dataset, Quintuple
from .errors import IdMismatch
from .spans import ElementSets, element_sets_of

AVERAGE_MODES = ("present", "fixed8")


def match_quintuples(gold: list[Quintuple], pred: list[Quintuple]) -> list[tuple[int, int]]:
    """Greedy one-to-one pairing of predictions with fully equal gold tuples.

    Matches require equality on all five fields, so greedy pairing is
    optimal; each gold tuple is consumed at most once.
    """
    taken = [False] * len(gold)
    pairs = []
    for pi, p in enumerate(pred):
        for gi, g in enumerate(gold):
            if not taken[gi] and p == g:
                taken[gi] = True
                pairs.append((pi, gi))
                break
    return pairs


def _prf(matched: int, predicted: int, gold: int) -> tuple[float, float, float]:
    p = matched / predicted if predicted else 0.0
    r = matched / gold if gold else 0.0
    f1 = 2 * p * r / (p + r) if (p + r) else 0.0
    return p, r, f1


@dataclass(frozen=True)
class LabelScore:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    matched: int


@dataclass(frozen=True)
class StageOneScore:
    accuracy: float
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    """Per-label and macro exact-match scores, plus optional stage sections."""

    per_label: dict[str, LabelScore]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    average_mode: str
    included_labels: tuple[str, ...]
    stage1: StageOneScore | None = None
    stage2: dict[str, LabelScore] = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = {
            "labels": {
                label: {
                    "precision": score.precision,
                    "recall": score.recall,
                    "f1": score.f1,
                    "gold": score.gold,
                    "predicted": score.predicted,
                    "matched": score.matched,
                }
                for label, score in self.per_label.items()
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "average_mode": self.average_mode,
            "included_labels": list(self.included_labels),
        }
        if self.stage1 is not None:
            doc["stage1"] = {
                "accuracy": self.stage1.accuracy,
                "precision": self.stage1.precision,
                "recall": self.stage1.recall,
                "f1": self.stage1.f1,
                "support": self.stage1.support,
            }
        if self.stage2:
            doc["stage2"] = {
                kind: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "gold": s.gold,
                    "predicted": s.predicted,
                    "matched": s.matched,
                }
                for kind, s in self.stage2.items()
            }
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "EvalReport":
        stage1 = None
        if "stage1" in doc:
            s = doc["stage1"]
            stage1 = StageOneScore(s["accuracy"], s["precision"], s["recall"],
                                   s["f1"], s["support"])
        return cls(
            per_label={
                label: LabelScore(v["precision"], v["recall"], v["f1"],
                                  v["gold"], v["predicted"], v["matched"])
                for label, v in doc["labels"].items()
            },
            macro_precision=doc["macro"]["precision"],
            macro_recall=doc["macro"]["recall"],
            macro_f1=doc["macro"]["f1"],
            average_mode=doc["average_mode"],
            included_labels=tuple(doc["included_labels"]),
            stage1=stage1,
            stage2={
                kind: LabelScore(v["precision"], v["recall"], v["f1"],
                                 v["gold"], v["predicted"], v["matched"])
                for kind, v in doc.get("stage2", {}).items()
            },
        )

    def to_text(self) -> str:
        lines = [f"{'Label':<8}{'MACRO-P':>10}{'MACRO-R':>10}{'MACRO-F1':>10}{'Support':>9}"]
        for label in COMPARISON_LABELS:
            if label not in self.per_label:
                continue
            s = self.per_label[label]
            lines.append(
                f"{label:<8}{s.precision:>10.4f}{s.recall:>10.4f}{s.f1:>10.4f}{s.gold:>9}"
            )
        lines.append(
            f"{'macro':<8}{self.macro_precision:>10.4f}{self.macro_recall:>10.4f}"
            f"{self.macro_f1:>10.4f}"
        )
        if self.stage1 is not None:
            lines.append("")
            lines.append(
                f"stage1  acc={self.stage1.accuracy:.4f} p={self.stage1.precision:.4f} "
                f"r={self.stage1.recall:.4f} f1={self.stage1.f1:.4f}"
            )
        if self.stage2:
            lines.append("stage2  " + "  ".join(
                f"{kind}:f1={s.f1:.4f}" for kind, s in self.stage2.items()
            ))
        return "\n".join(lines) + "\n"


def _paired_sentences(gold_dataset: Dataset, pred_dataset: Dataset):
    gold_by_id = gold_dataset.by_id()
    pred_by_id = pred_dataset.by_id()
    if set(gold_by_id) != set(pred_by_id):
        only_gold = sorted(set(gold_by_id) - set(pred_by_id))[:5]
        only_pred = sorted(set(pred_by_id) - set(gold_by_id))[:5]
        raise IdMismatch(
            f"sentence ids differ (gold-only {only_gold}, pred-only {only_pred})"
        )
    return [(gold_by_id[sid], pred_by_id[sid]) for sid in gold_by_id]


def e_t5_macro(gold_dataset: Dataset, pred_dataset: Dataset,
               average: str = "present") -> EvalReport:
    """Exact-quintuple precision/recall/F1 per label with an unweighted macro.

    average="present" skips labels absent from both gold and predictions;
    average="fixed8" always averages over the full eight-label alphabet.
    """
    if average not in AVERAGE_MODES:
        raise ValueError(f"average must be one of {AVERAGE_MODES}")
    gold_counts = {label: 0 for label in COMPARISON_LABELS}
    pred_counts = {label: 0 for label in COMPARISON_LABELS}
    match_counts = {label: 0 for label in COMPARISON_LABELS}
    for gold_s, pred_s in _paired_sentences(gold_dataset, pred_dataset):
        gold_tuples = list(gold_s.quintuples)
        pred_tuples = list(pred_s.quintuples)
        for q in gold_tuples:
            gold_counts[q.label] += 1
        for q in pred_tuples:
            pred_counts[q.label] += 1
        for pi, _ in match_quintuples(gold_tuples, pred_tuples):
            match_counts[pred_tuples[pi].label] += 1

    per_label = {}
    for label in COMPARISON_LABELS:
        p, r, f1 = _prf(match_counts[label], pred_counts[label], gold_counts[label])
        per_label[label] = LabelScore(p, r, f1, gold_counts[label],
                                      pred_counts[label], match_counts[label])

    if average == "fixed8":
        included = COMPARISON_LABELS
    else:
        included = tuple(
            label for label in COMPARISON_LABELS
            if gold_counts[label] or pred_counts[label]
        )
    if included:
        macro_p = sum(per_label[l].precision for l in included) / len(included)
        macro_r = sum(per_label[l].recall for l in included) / len(included)
        macro_f1 = sum(per_label[l].f1 for l in included) / len(included)
    else:
        macro_p = macro_r = macro_f1 = 0.0
    return EvalReport(
        per_label=per_label,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        average_mode=average,
        included_labels=included,
    )


def stage_metrics(gold_dataset: Dataset, trace: dict) -> tuple[StageOneScore, dict[str, LabelScore]]:
    """Score the comparative gate and span extraction against gold.

    trace maps sentence id to a record with keys "comparative" (bool) and
    "sets" (ElementSets of the decoded stage-2 spans).
    """
    gold_by_id = gold_dataset.by_id()
    if set(gold_by_id) != set(trace):
        raise IdMismatch("trace ids do not align with gold ids")

    tp = fp = fn = tn = 0
    span_gold = {kind: 0 for kind in ELEMENT_KINDS}
    span_pred = {kind: 0 for kind in ELEMENT_KINDS}
    span_match = {kind: 0 for kind in ELEMENT_KINDS}
    for sid, sentence in gold_by_id.items():
        record = trace[sid]
        predicted = bool(record["comparative"])
        actual = sentence.is_comparative
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
        gold_sets = element_sets_of(sentence)
        pred_sets: ElementSets = record["sets"]
        for kind in ELEMENT_KINDS:
            g = gold_sets.by_kind(kind)
            p = pred_sets.by_kind(kind)
            span_gold[kind] += len(g)
            span_pred[kind] += len(p)
            span_match[kind] += len(g & p)

    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    p, r, f1 = _prf(tp, tp + fp, tp + fn)
    stage1 = StageOneScore(accuracy, p, r, f1, support=total)
    stage2 = {}
    for kind in ELEMENT_KINDS:
        p, r, f1 = _prf(span_match[kind], span_pred[kind], span_gold[kind])
        stage2[kind] = LabelScore(p, r, f1, span_gold[kind], span_pred[kind],
                                  span_match[kind])
    return stage1, stage2
