"""Hashed sparse n-gram features for the native baseline models.

Word unigrams/bigrams and character 3-5 grams, hashed into a fixed-width
space with crc32 so feature indices are stable across runs and machines.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..core import ELEMENT_KINDS, TokenSpan

DEFAULT_DIM = 2 ** 18

_BOS = "<s>"
_EOS = "</s>"


def hash_index(feature: str, dim: int) -> int:
    return zlib.crc32(feature.encode("utf-8")) % dim


@dataclass(frozen=True)
class FeatureVector:
    """Sparse hashed features; index dim is the always-on bias slot."""

    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int


def hash_features(feature_strings: list[str], dim: int = DEFAULT_DIM) -> FeatureVector:
    counts: dict[int, float] = {}
    for f in feature_strings:
        idx = hash_index(f, dim)
        counts[idx] = counts.get(idx, 0.0) + 1.0
    counts[dim] = 1.0  # bias
    items = sorted(counts.items())
    return FeatureVector(
        indices=tuple(i for i, _ in items),
        values=tuple(v for _, v in items),
        dim=dim,
    )


def to_matrix(vectors: list[FeatureVector], dim: int) -> sparse.csr_matrix:
    """Stack feature vectors into a CSR matrix of width dim + 1."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for fv in vectors:
        indices.extend(fv.indices)
        data.extend(fv.values)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), dim + 1),
    )


def _char_ngrams(text: str, prefix: str, lo: int = 3, hi: int = 5) -> list[str]:
    padded = f"^{text}$"
    out = []
    for n in range(lo, hi + 1):
        for i in range(len(padded) - n + 1):
            out.append(f"{prefix}{padded[i:i + n]}")
    return out


def sentence_features(tokens: list[str]) -> list[str]:
    """Whole-sentence features for the 2-way comparative gate."""
    feats = [f"w={t.lower()}" for t in tokens]
    padded = [_BOS] + tokens + [_EOS]
    feats += [f"b={a}_{b}" for a, b in zip(padded, padded[1:])]
    feats += _char_ngrams(" ".join(tokens), "c=")
    return feats


def token_features(tokens: list[str], i: int) -> list[str]:
    """Window features for tagging one token."""

    def at(j: int) -> str:
        if j < 0:
            return _BOS
        if j >= len(tokens):
            return _EOS
        return tokens[j]

    t = tokens[i]
    feats = [
        f"cur={t}",
        f"low={t.lower()}",
        f"prev={at(i - 1)}",
        f"next={at(i + 1)}",
        f"prev2={at(i - 2)}",
        f"next2={at(i + 2)}",
        f"pb={at(i - 1)}|{t}",
        f"nb={t}|{at(i + 1)}",
    ]
    for k in (1, 2, 3):
        feats.append(f"pre{k}={t[:k]}")
        feats.append(f"suf{k}={t[-k:]}")
    feats += _char_ngrams(t, "tc=")
    if i == 0:
        feats.append("pos=first")
    if i == len(tokens) - 1:
        feats.append("pos=last")
    return feats


_SLOT_TAG = {"subject": "SUB", "object": "OBJ", "aspect": "ASP", "predicate": "PRED"}


def quadruple_features(tokens: list[str], quad) -> list[str]:
    """Features for labeling one (subject, object, aspect, predicate) combo.

    The predicate phrase carries most of the label signal; order and gap
    relations between slots separate real combinations from spurious ones.
    """
    feats: list[str] = []
    present: dict[str, TokenSpan] = {}
    for kind, span in zip(ELEMENT_KINDS, quad):
        tag = _SLOT_TAG[kind]
        if span is None:
            feats.append(f"no={tag}")
            continue
        present[kind] = span
        phrase = " ".join(tokens[span.start : span.end + 1])
        feats.append(f"{tag}={phrase}")
        feats += [f"{tag}w={w.lower()}" for w in phrase.split(" ")]
        if kind == "predicate":
            feats += _char_ngrams(phrase, "PREDc=")
    kinds = list(present)
    for a in range(len(kinds)):
        for b in range(a + 1, len(kinds)):
            ka, kb = kinds[a], kinds[b]
            sa, sb = present[ka], present[kb]
            order = "<" if sa.start < sb.start else (">" if sa.start > sb.start else "=")
            feats.append(f"ord={_SLOT_TAG[ka]}{order}{_SLOT_TAG[kb]}")
            gap = min(abs(sa.start - sb.end), abs(sb.start - sa.end))
            feats.append(f"gap={_SLOT_TAG[ka]}{_SLOT_TAG[kb]}:{min(gap, 4)}")
    return feats
