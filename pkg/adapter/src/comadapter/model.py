"""Encoder bundle: a BERT-family encoder plus one task head.

A compact randomly initialized configuration is the default so everything
runs offline; a pretrained checkpoint id or path drops in via
``checkpoint`` when weights are available locally. Artifacts are
directories holding the head/encoder weights, the vocabulary, and the
training settings that produced them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn
from transformers import BertConfig, BertModel

from . import TASK_WIDTHS
from .data import SLOTS
from .vocab import MARKERS, WordPieceVocab

ARTIFACT_FILE = "adapter.json"
WEIGHTS_FILE = "weights.pt"

AGGREGATIONS = ("max", "first")

_MARKER_FOR_SLOT = {slot: (MARKERS[2 * i], MARKERS[2 * i + 1])
                    for i, slot in enumerate(SLOTS)}


@dataclass(frozen=True)
class EncoderSpec:
    """Encoder size; ignored when a pretrained checkpoint is named."""

    hidden_size: int = 64
    num_hidden_layers: int = 2
    num_attention_heads: int = 2
    intermediate_size: int = 128
    max_position_embeddings: int = 256
    checkpoint: str | None = None

    def to_json(self) -> dict:
        return {
            "hidden_size": self.hidden_size,
            "num_hidden_layers": self.num_hidden_layers,
            "num_attention_heads": self.num_attention_heads,
            "intermediate_size": self.intermediate_size,
            "max_position_embeddings": self.max_position_embeddings,
            "checkpoint": self.checkpoint,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EncoderSpec":
        return cls(**doc)


class TaskModel(nn.Module):
    """Encoder plus a linear head sized for one capability."""

    def __init__(self, task: str, vocab: WordPieceVocab, spec: EncoderSpec):
        super().__init__()
        self.task = task
        self.vocab = vocab
        self.spec = spec
        if spec.checkpoint:
            self.encoder = BertModel.from_pretrained(spec.checkpoint)
        else:
            config = BertConfig(
                vocab_size=len(vocab),
                hidden_size=spec.hidden_size,
                num_hidden_layers=spec.num_hidden_layers,
                num_attention_heads=spec.num_attention_heads,
                intermediate_size=spec.intermediate_size,
                max_position_embeddings=spec.max_position_embeddings,
            )
            self.encoder = BertModel(config)
        self.head = nn.Linear(self.encoder.config.hidden_size, TASK_WIDTHS[task])

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        hidden = self.encoder(input_ids=input_ids,
                              attention_mask=attention_mask).last_hidden_state
        if self.task in ("sentence", "quadruple"):
            return self.head(hidden[:, 0])  # [CLS]
        return self.head(hidden)  # per sub-token rows


def encode_batch(vocab: WordPieceVocab, token_lists, markers_list=None,
                 max_length: int | None = None):
    """Pad a batch of encodings; returns (ids, mask, word_groups per item)."""
    markers_list = markers_list or [None] * len(token_lists)
    encodings = [
        vocab.encode(tokens, markers, max_length=max_length)
        for tokens, markers in zip(token_lists, markers_list)
    ]
    width = max(len(e.ids) for e in encodings)
    ids = torch.zeros((len(encodings), width), dtype=torch.long)
    mask = torch.zeros((len(encodings), width), dtype=torch.long)
    for row, enc in enumerate(encodings):
        ids[row, : len(enc.ids)] = torch.tensor(enc.ids, dtype=torch.long)
        mask[row, : len(enc.ids)] = 1
    return ids, mask, [e.word_groups for e in encodings]


def quad_markers(quad) -> dict[int, list[str]]:
    """Marker insertion points for a quadruple: open before, close after."""
    inserts: dict[int, list[str]] = {}
    for slot, span in zip(SLOTS, quad):
        if span is None:
            continue
        open_m, close_m = _MARKER_FOR_SLOT[slot]
        inserts.setdefault(span[0], []).append(open_m)
        inserts.setdefault(span[1] + 1, []).append(close_m)
    return inserts


def aggregate_rows(rows: torch.Tensor, word_groups: list[list[int]],
                   aggregation: str) -> torch.Tensor:
    """One logit row per word from sub-token rows."""
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
    out = []
    for group in word_groups:
        picked = rows[group]
        if aggregation == "first":
            out.append(picked[0])
        else:
            out.append(picked.max(dim=0).values)
    return torch.stack(out) if out else rows.new_zeros((0, rows.shape[-1]))


@dataclass
class Artifact:
    """A loadable fine-tuned model for one capability."""

    task: str
    model: TaskModel
    aggregation: str = "max"
    train_settings: dict = field(default_factory=dict)

    def save(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        header = {
            "format": "comadapter-artifact",
            "version": 1,
            "task": self.task,
            "aggregation": self.aggregation,
            "encoder": self.model.spec.to_json(),
            "vocab": self.model.vocab.to_json(),
            "train_settings": self.train_settings,
        }
        with open(out / ARTIFACT_FILE, "w", encoding="utf-8") as fh:
            json.dump(header, fh, ensure_ascii=False)
            fh.write("\n")
        torch.save(self.model.state_dict(), out / WEIGHTS_FILE)
        return out

    @classmethod
    def load(cls, artifact_dir) -> "Artifact":
        root = Path(artifact_dir)
        with open(root / ARTIFACT_FILE, encoding="utf-8") as fh:
            header = json.load(fh)
        if header.get("format") != "comadapter-artifact":
            raise ValueError(f"{root}: not an adapter artifact")
        vocab = WordPieceVocab.from_json(header["vocab"])
        spec = EncoderSpec.from_json(header["encoder"])
        model = TaskModel(header["task"], vocab, spec)
        model.load_state_dict(torch.load(root / WEIGHTS_FILE, weights_only=True))
        model.eval()
        return cls(
            task=header["task"],
            model=model,
            aggregation=header.get("aggregation", "max"),
            train_settings=header.get("train_settings", {}),
        )

    @torch.no_grad()
    def sentence_logits(self, tokens: list[str]) -> list[float]:
        ids, mask, _ = encode_batch(self.model.vocab, [list(tokens)])
        return self.model(ids, mask)[0].tolist()

    @torch.no_grad()
    def tag_logits(self, tokens: list[str]) -> list[list[float]]:
        ids, mask, groups = encode_batch(self.model.vocab, [list(tokens)])
        rows = self.model(ids, mask)[0]
        return aggregate_rows(rows, groups[0], self.aggregation).tolist()

    @torch.no_grad()
    def quadruple_logits(self, tokens: list[str], quad) -> list[float]:
        markers = quad_markers(quad)
        ids, mask, _ = encode_batch(self.model.vocab, [list(tokens)], [markers])
        return self.model(ids, mask)[0].tolist()
