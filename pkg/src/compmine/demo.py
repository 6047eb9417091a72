"""Seeded templated demo corpus covering all eight comparison labels.

Handy for smoke-testing the pipeline end to end without the shared-task
data: phone-review-style sentences with exact gold spans, a controllable
comparative fraction, and some multi-quintuple sentences. Run as
``python -m compmine.demo out.jsonl --size 500 --seed 7``.
"""

from __future__ import annotations

import argparse
import random

from .core import Dataset, Quintuple, Sentence, TokenSpan, sentence_from_tokens
from .ingest import export_dataset

PRODUCTS = [
    "iPhone 14", "Galaxy S23", "Xiaomi 13", "Nokia G21",
    "Oppo A78", "Vivo Y36", "Realme C55", "Pixel 7",
]

ASPECTS = ["pin", "camera", "màn hình", "giá", "loa", "hiệu năng", "thiết kế", "bộ nhớ"]

PREDICATES = {
    "DIF": ["khác hẳn", "khác biệt với"],
    "EQL": ["ngang với", "tương đương", "bằng"],
    "SUP+": ["tốt nhất", "đỉnh nhất"],
    "SUP-": ["tệ nhất", "kém nhất"],
    "SUP": ["lớn nhất", "nổi nhất"],
    "COM+": ["tốt hơn", "vượt trội hơn", "xịn hơn"],
    "COM-": ["kém hơn", "tệ hơn", "yếu hơn"],
    "COM": ["so bì với", "đọ với"],
}

_SUPERLATIVE = ("SUP+", "SUP-", "SUP")

FILLER = [
    "máy", "này", "dùng", "ổn", "mình", "mua", "hôm", "qua", "giao", "hàng",
    "nhanh", "shop", "phục", "vụ", "chu", "đáo", "rất", "thích", "sẽ", "ủng",
    "hộ", "đóng", "gói", "cẩn", "thận", "mới", "đập", "hộp",
]


def _span(tokens: list[str], phrase: str) -> TokenSpan:
    start = len(tokens)
    tokens.extend(phrase.split(" "))
    return TokenSpan(start, len(tokens) - 1)


def _comparative_sentence(sid: str, label: str, rng: random.Random) -> Sentence:
    pred_phrase = rng.choice(PREDICATES[label])
    tokens: list[str] = []
    if label in _SUPERLATIVE:
        # "<aspect> của <subject> <predicate>"
        aspect = _span(tokens, rng.choice(ASPECTS))
        tokens.append("của")
        subject = _span(tokens, rng.choice(PRODUCTS))
        predicate = _span(tokens, pred_phrase)
        q = Quintuple(subject, None, aspect, predicate, label)
    elif rng.random() < 0.5:
        # "<subject> có <aspect> <predicate> <object>"
        subject = _span(tokens, rng.choice(PRODUCTS))
        tokens.append("có")
        aspect = _span(tokens, rng.choice(ASPECTS))
        predicate = _span(tokens, pred_phrase)
        obj = _span(tokens, rng.choice([p for p in PRODUCTS if not p.startswith(tokens[0])]))
        q = Quintuple(subject, obj, aspect, predicate, label)
    else:
        # "<subject> <predicate> <object>"
        subject = _span(tokens, rng.choice(PRODUCTS))
        predicate = _span(tokens, pred_phrase)
        obj = _span(tokens, rng.choice([p for p in PRODUCTS if not p.startswith(tokens[0])]))
        q = Quintuple(subject, obj, None, predicate, label)
    return sentence_from_tokens(sid, tokens, (q,))


def _multi_sentence(sid: str, label1: str, label2: str, rng: random.Random) -> Sentence:
    # "<subject> có <aspect> <pred1> <object> nhưng <aspect2> <pred2>"
    tokens: list[str] = []
    subject = _span(tokens, rng.choice(PRODUCTS))
    tokens.append("có")
    aspect1 = _span(tokens, rng.choice(ASPECTS))
    pred1 = _span(tokens, rng.choice(PREDICATES[label1]))
    obj = _span(tokens, rng.choice([p for p in PRODUCTS if not p.startswith(tokens[0])]))
    tokens.append("nhưng")
    aspect2 = _span(tokens, rng.choice([a for a in ASPECTS if a != " ".join(
        tokens[aspect1.start : aspect1.end + 1])]))
    pred2 = _span(tokens, rng.choice(PREDICATES[label2]))
    q1 = Quintuple(subject, obj, aspect1, pred1, label1)
    q2 = Quintuple(subject, None, aspect2, pred2, label2)
    return sentence_from_tokens(sid, tokens, (q1, q2))


def _filler_sentence(sid: str, rng: random.Random) -> Sentence:
    n = rng.randint(3, 7)
    return sentence_from_tokens(sid, [rng.choice(FILLER) for _ in range(n)])


def build_demo_corpus(
    size: int = 500,
    seed: int = 7,
    comparative_fraction: float = 0.6,
    multi_fraction: float = 0.15,
) -> Dataset:
    """Deterministic labeled corpus; labels cycle so all eight appear."""
    rng = random.Random(seed)
    labels = list(PREDICATES)
    sentences = []
    li = 0
    for i in range(size):
        sid = f"demo-{i:04d}"
        if rng.random() < comparative_fraction:
            if rng.random() < multi_fraction:
                l1 = labels[li % 8]
                l2 = labels[(li + 3) % 8]
                li += 1
                sentences.append(_multi_sentence(sid, l1, l2, rng))
            else:
                label = labels[li % 8]
                li += 1
                sentences.append(_comparative_sentence(sid, label, rng))
        else:
            sentences.append(_filler_sentence(sid, rng))
    return Dataset(tuple(sentences), provenance=f"demo seed={seed} size={size}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output canonical JSONL path")
    parser.add_argument("--size", type=int, default=500)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--comparative-fraction", type=float, default=0.6)
    args = parser.parse_args(argv)
    dataset = build_demo_corpus(args.size, args.seed, args.comparative_fraction)
    export_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} sentences to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
