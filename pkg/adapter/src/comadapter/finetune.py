"""Fine-tuning for the three capabilities on canonical JSONL datasets.

Defaults mirror the experiment setup: AdamW, learning rate 3e-5, batch
size 32, 15 epochs. Runs are seeded end to end so two runs on the same
machine produce identical evaluation logits.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass

import torch
from torch import nn
from torch.optim import AdamW

from .data import Example, bio_tags, quadruple_examples, read_dataset
from .model import Artifact, EncoderSpec, TaskModel, encode_batch, quad_markers
from .vocab import WordPieceVocab

TASKS = ("sentence", "tag", "quadruple")

IGNORE_INDEX = -100


@dataclass(frozen=True)
class TrainSettings:
    """Optimizer and schedule defaults for fine-tuning."""

    learning_rate: float = 3e-5
    batch_size: int = 32
    epochs: int = 15
    seed: int = 0
    weight_decay: float = 0.01
    aggregation: str = "max"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning rate, batch size, and epochs must be positive")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "TrainSettings":
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__ if k in doc})


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    torch.manual_seed(seed)


def _sentence_batches(examples: list[Example]):
    return [(list(e.tokens), None, int(e.comparative)) for e in examples if e.tokens]


def _tag_batches(examples: list[Example]):
    items = []
    for e in examples:
        if e.comparative and e.tokens:
            items.append((list(e.tokens), None, bio_tags(e)))
    return items


def _quadruple_batches(examples: list[Example]):
    items = []
    for e in examples:
        if not e.comparative:
            continue
        for quad, label in quadruple_examples(e):
            items.append((list(e.tokens), quad_markers(quad), label))
    return items


_BATCHERS = {
    "sentence": _sentence_batches,
    "tag": _tag_batches,
    "quadruple": _quadruple_batches,
}


def finetune(task: str, dataset_path, settings: TrainSettings = TrainSettings(),
             encoder: EncoderSpec = EncoderSpec()) -> Artifact:
    """Train one capability model; returns an artifact ready to serve."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    examples = read_dataset(dataset_path)
    items = _BATCHERS[task](examples)
    if not items:
        raise ValueError(f"no {task} training examples in {dataset_path}")

    _seed_everything(settings.seed)
    vocab = WordPieceVocab.build([tokens for tokens, _, _ in items])
    model = TaskModel(task, vocab, encoder)
    model.train()
    optimizer = AdamW(model.parameters(), lr=settings.learning_rate,
                      weight_decay=settings.weight_decay)
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)

    order = list(range(len(items)))
    rng = random.Random(settings.seed)
    for _ in range(settings.epochs):
        rng.shuffle(order)
        for lo in range(0, len(order), settings.batch_size):
            batch = [items[i] for i in order[lo : lo + settings.batch_size]]
            tokens = [b[0] for b in batch]
            markers = [b[1] for b in batch]
            ids, mask, groups = encode_batch(vocab, tokens, markers)
            logits = model(ids, mask)
            if task == "tag":
                target = torch.full(ids.shape, IGNORE_INDEX, dtype=torch.long)
                for row, (b, word_groups) in enumerate(zip(batch, groups)):
                    for word_index, piece_positions in enumerate(word_groups):
                        for pos in piece_positions:
                            target[row, pos] = b[2][word_index]
                loss = loss_fn(logits.transpose(1, 2), target)
            else:
                target = torch.tensor([b[2] for b in batch], dtype=torch.long)
                loss = loss_fn(logits, target)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

    model.eval()
    return Artifact(task=task, model=model, aggregation=settings.aggregation,
                    train_settings=settings.to_json())
