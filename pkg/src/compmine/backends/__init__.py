"""Uniform classifier interfaces over native and external models.

A backend advertises capabilities and answers the three inference
operations; the dispatch functions here enforce capability, batch-order,
and logit-shape contracts no matter what sits behind the interface.
"""

from __future__ import annotations

import numpy as np

from ..core import NUM_STAGE_LABELS, NUM_TAGS, Sentence, check_logits
from ..ensemble import BootstrapEnsemble, EnsembleWeights, combine_weighted
from ..errors import CapabilityMissing
from ..protocol import (
    CAP_QUADRUPLE,
    CAP_SENTENCE,
    CAP_TAG,
    CAPABILITY_FOR_TASK,
    TASK_QUADRUPLE,
    TASK_SENTENCE,
    TASK_TAG,
)
from .external import (
    BackendDescriptor,
    ChildProcessTransport,
    ExternalBackend,
    TcpTransport,
    connect_external,
)
from .features import DEFAULT_DIM, FeatureVector, hash_features, to_matrix
from .native import (
    ALPHABETS,
    NativeModel,
    TrainConfig,
    ce_loss_and_grad,
    featurize,
    load_model,
    save_model,
    train_native,
    training_curve,
)

__all__ = [
    "ALPHABETS",
    "BackendDescriptor",
    "ChildProcessTransport",
    "DEFAULT_DIM",
    "EnsembleBackend",
    "ExternalBackend",
    "FeatureVector",
    "NativeBackend",
    "NativeModel",
    "TcpTransport",
    "TrainConfig",
    "bootstrap_backend",
    "ce_loss_and_grad",
    "classify_quadruple",
    "classify_sentence",
    "connect_external",
    "describe_native",
    "hash_features",
    "load_model",
    "native_score",
    "native_train_fn",
    "save_model",
    "tag_tokens",
    "to_matrix",
    "train_native",
    "training_curve",
]

_CAP_FOR_NATIVE_TASK = {
    TASK_SENTENCE: CAP_SENTENCE,
    TASK_TAG: CAP_TAG,
    TASK_QUADRUPLE: CAP_QUADRUPLE,
}


class NativeBackend:
    """Inference wrapper binding a trained native model to the backend API."""

    def __init__(self, model: NativeModel, name: str | None = None):
        self.model = model
        self.name = name or f"native-{model.task}"
        self.capabilities = frozenset({_CAP_FOR_NATIVE_TASK[model.task]})

    def classify_sentences(self, sentences) -> list[np.ndarray]:
        return [
            self.model.logits(featurize(TASK_SENTENCE, s, self.model.dim)[0])
            for s in sentences
        ]

    def tag_tokens(self, sentences) -> list[np.ndarray]:
        out = []
        for s in sentences:
            vectors = featurize(TASK_TAG, s, self.model.dim)
            out.append(self.model.logits_matrix(to_matrix(vectors, self.model.dim)))
        return out

    def classify_quadruple(self, sentence, quad) -> np.ndarray:
        return self.model.logits(
            featurize(TASK_QUADRUPLE, sentence, self.model.dim, quad)[0]
        )


class EnsembleBackend:
    """Weighted logit combination over member backends with shared capability."""

    def __init__(self, members, weights: EnsembleWeights | None = None,
                 name: str = "ensemble"):
        if not members:
            raise ValueError("ensemble needs at least one member")
        self.members = tuple(members)
        self.weights = weights or EnsembleWeights.uniform(len(self.members))
        if len(self.weights) != len(self.members):
            raise ValueError("one weight per member required")
        self.name = name
        caps = frozenset(self.members[0].capabilities)
        for m in self.members[1:]:
            caps &= m.capabilities
        self.capabilities = caps

    def classify_sentences(self, sentences) -> list[np.ndarray]:
        per_member = [m.classify_sentences(sentences) for m in self.members]
        return [
            combine_weighted([out[i] for out in per_member], self.weights)
            for i in range(len(sentences))
        ]

    def tag_tokens(self, sentences) -> list[np.ndarray]:
        per_member = [m.tag_tokens(sentences) for m in self.members]
        return [
            combine_weighted([out[i] for out in per_member], self.weights)
            for i in range(len(sentences))
        ]

    def classify_quadruple(self, sentence, quad) -> np.ndarray:
        return combine_weighted(
            [m.classify_quadruple(sentence, quad) for m in self.members], self.weights
        )


def bootstrap_backend(ensemble: BootstrapEnsemble, name: str = "bootstrap") -> EnsembleBackend:
    """Backend view of a k-fold bootstrap: uniform logit averaging."""
    return EnsembleBackend(
        [NativeBackend(m) for m in ensemble.members], name=name
    )


def describe_native(model: NativeModel, name: str | None = None) -> BackendDescriptor:
    return BackendDescriptor(
        name=name or f"native-{model.task}",
        capabilities=frozenset({_CAP_FOR_NATIVE_TASK[model.task]}),
        kind="native",
    )


def _require(backend, capability: str) -> None:
    if capability not in backend.capabilities:
        raise CapabilityMissing(
            f"{getattr(backend, 'name', backend)!r} lacks {capability}"
        )


def classify_sentence(backend, sentences: list[Sentence]) -> list[np.ndarray]:
    """Batch 2-way comparative logits; class 1 means comparative."""
    _require(backend, CAP_SENTENCE)
    out = backend.classify_sentences(list(sentences))
    if len(out) != len(sentences):
        raise ValueError(f"backend returned {len(out)} results for {len(sentences)} inputs")
    return [check_logits(lv, 2) for lv in out]


def tag_tokens(backend, sentences: list[Sentence]) -> list[np.ndarray]:
    """Batch per-token 9-tag logits aligned to the whitespace tokenizer."""
    _require(backend, CAP_TAG)
    out = backend.tag_tokens(list(sentences))
    if len(out) != len(sentences):
        raise ValueError(f"backend returned {len(out)} results for {len(sentences)} inputs")
    return [check_logits(rows, NUM_TAGS) for rows in out]


def classify_quadruple(backend, sentence: Sentence, quad) -> np.ndarray:
    """9-way stage-label logits for one candidate quadruple."""
    _require(backend, CAP_QUADRUPLE)
    if all(s is None for s in quad):
        raise ValueError("quadruple must fill at least one slot")
    n = len(sentence)
    for span in quad:
        if span is not None and span.end >= n:
            raise ValueError(f"span {span} exceeds sentence length {n}")
    return check_logits(backend.classify_quadruple(sentence, quad), NUM_STAGE_LABELS)


def native_train_fn(task: str, dataset, config: TrainConfig, seed_offset: int = 0) -> NativeModel:
    """bootstrap_train adapter: per-member seed variation, same recipe."""
    member_config = TrainConfig(**{**config.to_json(), "seed": config.seed + seed_offset})
    return train_native(task, dataset, member_config)


def native_score(task: str, model: NativeModel, dataset) -> float:
    """Held-out accuracy of a native model on its task."""
    backend = NativeBackend(model)
    if task == TASK_SENTENCE:
        sentences = list(dataset)
        if not sentences:
            return float("nan")
        logits = classify_sentence(backend, sentences)
        hits = sum(
            int(lv[1] > lv[0]) == int(s.is_comparative)
            for lv, s in zip(logits, sentences)
        )
        return hits / len(sentences)
    if task == TASK_TAG:
        from ..core import tags_for_quintuples

        total = hits = 0
        for s in dataset.comparative():
            gold = tags_for_quintuples(s)
            pred = tag_tokens(backend, [s])[0].argmax(axis=1)
            hits += int((pred == np.asarray(gold)).sum())
            total += len(gold)
        return hits / total if total else float("nan")
    if task == TASK_QUADRUPLE:
        total = hits = 0
        for s in dataset.comparative():
            for q in s.quintuples:
                logits = classify_quadruple(backend, s, q.spans())
                hits += int(ALPHABETS[TASK_QUADRUPLE][int(logits.argmax())] == q.label)
                total += 1
        return hits / total if total else float("nan")
    raise ValueError(f"unknown task {task!r}")
