"""Brute-force reference scorer for exact-tuple matching.

Enumerates injective prediction-to-gold assignments recursively and takes
the maximum match count, never reusing the greedy code path it checks.
"""

from compmine.core import COMPARISON_LABELS


def max_injective_matches(gold: list, pred: list) -> int:
    """Maximum one-to-one pairing of equal tuples, by exhaustive search."""

    def rec(i: int, used: frozenset) -> int:
        if i == len(pred):
            return 0
        best = rec(i + 1, used)  # leave pred[i] unmatched
        for j, g in enumerate(gold):
            if j not in used and pred[i] == g:
                best = max(best, 1 + rec(i + 1, used | {j}))
        return best

    return rec(0, frozenset())


def _prf(matched, predicted, gold):
    p = matched / predicted if predicted else 0.0
    r = matched / gold if gold else 0.0
    f1 = 2 * p * r / (p + r) if (p + r) else 0.0
    return p, r, f1


def oracle_macro(gold_dataset, pred_dataset, average="present"):
    """(macro_p, macro_r, macro_f1, per-label dict) by exhaustive matching."""
    gold_by_id = gold_dataset.by_id()
    pred_by_id = pred_dataset.by_id()
    assert set(gold_by_id) == set(pred_by_id)

    per_label = {}
    for label in COMPARISON_LABELS:
        matched = predicted = gold = 0
        for sid in gold_by_id:
            g = [q for q in gold_by_id[sid].quintuples if q.label == label]
            p = [q for q in pred_by_id[sid].quintuples if q.label == label]
            gold += len(g)
            predicted += len(p)
            matched += max_injective_matches(g, p)
        per_label[label] = (_prf(matched, predicted, gold), matched, predicted, gold)

    if average == "fixed8":
        included = list(COMPARISON_LABELS)
    else:
        included = [
            label for label in COMPARISON_LABELS
            if per_label[label][2] or per_label[label][3]
        ]
    if not included:
        return 0.0, 0.0, 0.0, per_label
    macro_p = sum(per_label[l][0][0] for l in included) / len(included)
    macro_r = sum(per_label[l][0][1] for l in included) / len(included)
    macro_f1 = sum(per_label[l][0][2] for l in included) / len(included)
    return macro_p, macro_r, macro_f1, per_label
