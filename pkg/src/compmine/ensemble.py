"""Logit combination across backends and k-fold bootstrap training.

Two combination schemes: a weighted sum of raw logits from heterogeneous
models, and "bootstrapping" in the k-fold bagging sense: k identical models
each trained on k-1 folds, predictions averaged. Raw logits are summed as-is,
never renormalized.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import ShapeMismatch, TooFewSamples, WeightCountMismatch


@dataclass(frozen=True)
class EnsembleWeights:
    """Non-negative member weights, at least one positive."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(w < 0 for w in self.values):
            raise ValueError("weights must be non-negative")
        if not any(w > 0 for w in self.values):
            raise ValueError("at least one weight must be positive")

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def uniform(cls, k: int) -> "EnsembleWeights":
        return cls((1.0 / k,) * k)


def combine_weighted(logit_sets, weights) -> np.ndarray:
    """Elementwise weighted sum of equal-shape logit tensors."""
    if isinstance(weights, EnsembleWeights):
        weights = weights.values
    tensors = [np.asarray(t, dtype=float) for t in logit_sets]
    if not tensors:
        raise WeightCountMismatch("no logit tensors to combine")
    if len(weights) != len(tensors):
        raise WeightCountMismatch(
            f"{len(weights)} weights for {len(tensors)} members"
        )
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise ShapeMismatch(f"tensor shapes differ: {t.shape} vs {shape}")
    out = np.zeros(shape, dtype=float)
    for w, t in zip(weights, tensors):
        out += w * t
    return out


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every sentence id to exactly one of k folds."""

    k: int
    assignment: dict[str, int]
    seed: int

    def fold_ids(self, fold: int) -> list[str]:
        return [sid for sid, f in self.assignment.items() if f == fold]

    def sizes(self) -> list[int]:
        sizes = [0] * self.k
        for f in self.assignment.values():
            sizes[f] += 1
        return sizes


def make_folds(dataset: Dataset, k: int = 3, seed: int = 0) -> FoldPlan:
    """Seeded shuffle then round-robin assignment into k folds."""
    if k < 2:
        raise ValueError("k must be >= 2")
    ids = [s.id for s in dataset]
    if len(ids) < k:
        raise TooFewSamples(f"{len(ids)} sentences cannot fill {k} folds")
    rng = random.Random(seed)
    rng.shuffle(ids)
    return FoldPlan(k=k, assignment={sid: i % k for i, sid in enumerate(ids)}, seed=seed)


@dataclass(frozen=True)
class BootstrapEnsemble:
    """k sibling models plus the validation score each earned on its held fold."""

    task: str
    members: tuple
    validation_scores: tuple[float, ...]
    plan: FoldPlan


def bootstrap_train(
    task: str,
    dataset: Dataset,
    plan: FoldPlan,
    config,
    train_fn,
    score_fn=None,
) -> BootstrapEnsemble:
    """Train one model per fold on the other k-1 folds.

    train_fn(task, Dataset, config, seed_offset) -> model;
    score_fn(task, model, Dataset) -> float, evaluated on the held fold.
    Every sample validates exactly once and trains exactly k-1 times.
    """
    by_id = dataset.by_id()
    missing = [sid for sid in by_id if sid not in plan.assignment]
    if missing:
        raise ValueError(f"fold plan does not cover ids {missing[:5]}")

    members = []
    scores = []
    for fold in range(plan.k):
        train_sents = tuple(s for s in dataset if plan.assignment[s.id] != fold)
        valid_sents = tuple(s for s in dataset if plan.assignment[s.id] == fold)
        try:
            model = train_fn(task, Dataset(train_sents), config, fold)
        except Exception as exc:
            raise type(exc)(f"bootstrap member {fold}: {exc}") from exc
        members.append(model)
        scores.append(
            score_fn(task, model, Dataset(valid_sents)) if score_fn else float("nan")
        )
    return BootstrapEnsemble(task, tuple(members), tuple(scores), plan)


def bootstrap_predict(ensemble_or_members, x) -> np.ndarray:
    """Arithmetic mean of member logits on one input.

    Exactly combine_weighted with uniform weights 1/k; members expose
    logits(x).
    """
    members = getattr(ensemble_or_members, "members", ensemble_or_members)
    outputs = [m.logits(x) for m in members]
    return combine_weighted(outputs, EnsembleWeights.uniform(len(outputs)))


def write_manifest(path, task: str, alphabet, member_paths, weights=None) -> None:
    """Ensemble manifest: member model paths, weights, task, alphabet."""
    if weights is None:
        weights = [1.0 / len(member_paths)] * len(member_paths)
    doc = {
        "task": task,
        "alphabet": list(alphabet),
        "weights": list(weights),
        "members": [str(p) for p in member_paths],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("task", "alphabet", "weights", "members"):
        if key not in doc:
            raise ValueError(f"ensemble manifest missing {key!r}")
    if len(doc["weights"]) != len(doc["members"]):
        raise WeightCountMismatch("manifest weights do not match member count")
    return doc
