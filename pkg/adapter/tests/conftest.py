import json
import subprocess
import sys

import pytest

from comadapter.finetune import TrainSettings, finetune
from comadapter.model import EncoderSpec

TINY = EncoderSpec(hidden_size=32, num_hidden_layers=1, num_attention_heads=2,
                   intermediate_size=64)

FAST = TrainSettings(learning_rate=1e-3, batch_size=8, epochs=2, seed=0)

PRODUCTS = ["iPhone", "Galaxy", "Xiaomi", "Nokia"]
PREDICATES = {
    "COM+": "tốt hơn", "COM-": "kém hơn", "EQL": "ngang với", "DIF": "khác hẳn",
    "SUP+": "tốt nhất", "SUP-": "tệ nhất", "SUP": "lớn nhất", "COM": "đọ với",
}


def tiny_corpus_lines(n=24):
    """Canonical JSONL lines: simple 'A <pred> B' sentences plus fillers."""
    lines = []
    labels = list(PREDICATES)
    for i in range(n):
        if i % 3 == 2:
            lines.append(json.dumps(
                {"id": f"p{i}", "text": "giao hàng nhanh", "quintuples": []},
                ensure_ascii=False))
            continue
        label = labels[i % len(labels)]
        pred = PREDICATES[label]
        pred_len = len(pred.split(" "))
        subj = PRODUCTS[i % 4]
        obj = PRODUCTS[(i + 1) % 4]
        text = f"{subj} {pred} {obj}"
        quintuple = {
            "subject": [0, 0],
            "object": [1 + pred_len, 1 + pred_len],
            "aspect": None,
            "predicate": [1, pred_len],
            "label": label,
        }
        lines.append(json.dumps(
            {"id": f"c{i}", "text": text, "quintuples": [quintuple]},
            ensure_ascii=False))
    return lines


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tiny.jsonl"
    path.write_text("\n".join(tiny_corpus_lines()) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def artifacts(tiny_dataset, tmp_path_factory):
    """One fine-tuned artifact directory per capability."""
    base = tmp_path_factory.mktemp("artifacts")
    paths = {}
    for task in ("sentence", "tag", "quadruple"):
        artifact = finetune(task, tiny_dataset, FAST, TINY)
        paths[task] = artifact.save(base / task)
    return paths


def serve_argv(artifacts, *extra):
    return (
        sys.executable, "-m", "comadapter.cli", "serve",
        "--sentence-model", str(artifacts["sentence"]),
        "--tag-model", str(artifacts["tag"]),
        "--quadruple-model", str(artifacts["quadruple"]),
        *extra,
    )
