"""Self-contained linear baselines for the three sub-tasks.

Multinomial logistic regression over hashed n-gram features, trained with a
decoupled-weight-decay adaptive gradient method. No GPUs, no pretrained
weights: these models make the whole pipeline trainable and testable on a
laptop, with external transformer backends as drop-in upgrades.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..core import (
    NONE_LABEL,
    STAGE_LABELS,
    TAG_NAMES,
    Dataset,
    Sentence,
    tags_for_quintuples,
)
from ..errors import EmptyTrainingSet, OverlappingElements, TaskMismatch
from ..protocol import TASK_QUADRUPLE, TASK_SENTENCE, TASK_TAG, TASKS
from ..spans import element_sets_of, generate_quadruples
from .features import (
    DEFAULT_DIM,
    FeatureVector,
    hash_features,
    quadruple_features,
    sentence_features,
    to_matrix,
    token_features,
)

SENTENCE_ALPHABET = ("non-comparative", "comparative")

ALPHABETS = {
    TASK_SENTENCE: SENTENCE_ALPHABET,
    TASK_TAG: TAG_NAMES,
    TASK_QUADRUPLE: STAGE_LABELS,
}

_MAGIC = b"COMPMINE-NATIVE-V1\n"


@dataclass(frozen=True)
class TrainConfig:
    """Shared training hyperparameters; defaults follow the experiment setup."""

    learning_rate: float = 3e-5
    batch_size: int = 32
    epochs: int = 15
    seed: int = 0
    weight_decay: float = 0.01
    hash_dim: int = DEFAULT_DIM

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.hash_dim < 2:
            raise ValueError("hash dim must be >= 2")

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "weight_decay": self.weight_decay,
            "hash_dim": self.hash_dim,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        return cls(**{k: obj[k] for k in cls.__dataclass_fields__ if k in obj})


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def ce_loss_and_grad(
    weights: np.ndarray, x: sparse.csr_matrix, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its analytic gradient for a batch.

    Weight decay is decoupled from this loss; the optimizer applies it
    directly to the weights.
    """
    n = x.shape[0]
    probs = softmax(x @ weights.T)
    loss = float(-np.log(probs[np.arange(n), y] + 1e-300).mean())
    probs[np.arange(n), y] -= 1.0
    grad = np.asarray((x.T @ probs).T) / n
    return loss, grad


@dataclass
class NativeModel:
    """Linear classifier over hashed features; immutable once trained."""

    task: str
    alphabet: tuple[str, ...]
    dim: int
    weights: np.ndarray  # (classes, dim + 1); last column is the bias

    def logits(self, fv: FeatureVector) -> np.ndarray:
        out = self.weights[:, list(fv.indices)] @ np.asarray(fv.values)
        return out

    def logits_matrix(self, x: sparse.csr_matrix) -> np.ndarray:
        return np.asarray(x @ self.weights.T)

    def num_classes(self) -> int:
        return len(self.alphabet)


def _adamw(
    x: sparse.csr_matrix,
    y: np.ndarray,
    num_classes: int,
    config: TrainConfig,
) -> tuple[np.ndarray, list[float]]:
    """Mini-batch AdamW; returns final weights and per-epoch mean loss."""
    n, width = x.shape
    w = np.zeros((num_classes, width))
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    rng = random.Random(config.seed)
    order = list(range(n))
    step = 0
    epoch_losses = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            batch = order[lo : lo + config.batch_size]
            loss, grad = ce_loss_and_grad(w, x[batch], y[batch])
            total += loss * len(batch)
            step += 1
            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad * grad
            m_hat = m / (1 - beta1 ** step)
            v_hat = v / (1 - beta2 ** step)
            w -= config.learning_rate * (
                m_hat / (np.sqrt(v_hat) + eps) + config.weight_decay * w
            )
        epoch_losses.append(total / n)
    return w, epoch_losses


def _sentence_examples(dataset: Dataset) -> tuple[list[list[str]], list[int]]:
    feats, labels = [], []
    for s in dataset:
        feats.append(sentence_features(s.token_texts()))
        labels.append(int(s.is_comparative))
    return feats, labels


def _tag_examples(dataset: Dataset) -> tuple[list[list[str]], list[int]]:
    feats, labels = [], []
    for s in dataset.comparative():
        try:
            tags = tags_for_quintuples(s)
        except OverlappingElements:
            continue  # lint-flagged data; not trainable as a single tag row
        texts = s.token_texts()
        for i, tag in enumerate(tags):
            feats.append(token_features(texts, i))
            labels.append(tag)
    return feats, labels


def _shift_quad(quad, n: int):
    shifted = []
    for span in quad:
        if span is None:
            shifted.append(None)
        elif span.end + 1 < n:
            shifted.append(type(span)(span.start + 1, span.end + 1))
        else:
            return None
    return tuple(shifted)


def _quadruple_examples(dataset: Dataset) -> tuple[list[list[str]], list[int]]:
    none_id = STAGE_LABELS.index(NONE_LABEL)
    feats, labels = [], []
    for s in dataset.comparative():
        texts = s.token_texts()
        gold = {}
        for q in s.quintuples:
            gold[q.spans()] = STAGE_LABELS.index(q.label)
        for quad, label in gold.items():
            feats.append(quadruple_features(texts, quad))
            labels.append(label)
        negatives = []
        candidates, _ = generate_quadruples(element_sets_of(s))
        for quad in candidates:
            if quad not in gold:
                negatives.append(quad)
        for quad in gold:
            shifted = _shift_quad(quad, len(s))
            if shifted and shifted not in gold:
                negatives.append(shifted)
        for quad in negatives[: max(1, len(gold))]:
            feats.append(quadruple_features(texts, quad))
            labels.append(none_id)
    return feats, labels


_EXAMPLES = {
    TASK_SENTENCE: _sentence_examples,
    TASK_TAG: _tag_examples,
    TASK_QUADRUPLE: _quadruple_examples,
}


def train_native(task: str, dataset: Dataset, config: TrainConfig) -> NativeModel:
    """Train a linear model for one sub-task; deterministic given the seed.

    The tagger and the quadruple classifier train on comparative sentences
    only; the sentence gate sees everything.
    """
    if task not in TASKS:
        raise TaskMismatch(f"unknown task {task!r}")
    feature_lists, labels = _EXAMPLES[task](dataset)
    if not feature_lists:
        raise EmptyTrainingSet(f"no {task} examples in dataset")
    vectors = [hash_features(f, config.hash_dim) for f in feature_lists]
    x = to_matrix(vectors, config.hash_dim)
    y = np.asarray(labels, dtype=np.int64)
    alphabet = ALPHABETS[task]
    weights, _ = _adamw(x, y, len(alphabet), config)
    return NativeModel(task=task, alphabet=tuple(alphabet), dim=config.hash_dim,
                       weights=weights)


def training_curve(task: str, dataset: Dataset, config: TrainConfig) -> list[float]:
    """Per-epoch training loss, for convergence diagnostics."""
    feature_lists, labels = _EXAMPLES[task](dataset)
    if not feature_lists:
        raise EmptyTrainingSet(f"no {task} examples in dataset")
    x = to_matrix([hash_features(f, config.hash_dim) for f in feature_lists],
                  config.hash_dim)
    y = np.asarray(labels, dtype=np.int64)
    _, losses = _adamw(x, y, len(ALPHABETS[task]), config)
    return losses


def save_model(model: NativeModel, path) -> None:
    """Versioned container: magic, JSON header, raw float64 weights."""
    header = {
        "task": model.task,
        "alphabet": list(model.alphabet),
        "dim": model.dim,
        "shape": list(model.weights.shape),
        "dtype": "float64",
    }
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(json.dumps(header, ensure_ascii=False).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(model.weights, dtype=np.float64).tobytes())


def load_model(path) -> NativeModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a native model file")
        header = json.loads(fh.readline().decode("utf-8"))
        shape = tuple(header["shape"])
        data = np.frombuffer(fh.read(), dtype=np.float64).reshape(shape)
    return NativeModel(
        task=header["task"],
        alphabet=tuple(header["alphabet"]),
        dim=int(header["dim"]),
        weights=data.copy(),
    )


def featurize(task: str, sentence: Sentence, dim: int, quad=None) -> list[FeatureVector]:
    """Feature vectors a native model expects for one sentence input."""
    texts = sentence.token_texts()
    if task == TASK_SENTENCE:
        return [hash_features(sentence_features(texts), dim)]
    if task == TASK_TAG:
        return [hash_features(token_features(texts, i), dim) for i in range(len(texts))]
    if task == TASK_QUADRUPLE:
        return [hash_features(quadruple_features(texts, quad), dim)]
    raise TaskMismatch(f"unknown task {task!r}")
