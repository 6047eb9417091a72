"""Word-piece tokenization with an exact word-to-pieces mapping.

Known words map to a single piece; unknown words fall back to character
pieces, so multi-piece words always exist and per-word aggregation of
sub-token logits stays a real code path. The piece grouping per word is
what lets the server return exactly one logit row per request token.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

PAD, UNK, CLS, SEP = "[PAD]", "[UNK]", "[CLS]", "[SEP]"

# Span boundary markers for the quadruple task, one open/close pair per slot.
MARKERS = (
    "[SUB]", "[/SUB]",
    "[OBJ]", "[/OBJ]",
    "[ASP]", "[/ASP]",
    "[PRED]", "[/PRED]",
)

SPECIALS = (PAD, UNK, CLS, SEP) + MARKERS


@dataclass(frozen=True)
class Encoding:
    ids: list[int]
    # sub-token index lists per request word, excluding specials/markers
    word_groups: list[list[int]]


class WordPieceVocab:
    """Vocabulary of full words plus single characters as fallback pieces."""

    def __init__(self, words: list[str], chars: list[str]):
        self.itos: list[str] = list(SPECIALS) + sorted(set(chars)) + sorted(set(words))
        self.stoi = {piece: i for i, piece in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @classmethod
    def build(cls, token_lists, min_count: int = 1) -> "WordPieceVocab":
        word_counts: Counter = Counter()
        chars: set[str] = set()
        for tokens in token_lists:
            for tok in tokens:
                word_counts[tok] += 1
                chars.update(tok)
        words = [w for w, c in word_counts.items() if c >= min_count]
        return cls(words, sorted(chars))

    def pieces_for_word(self, word: str) -> list[int]:
        wid = self.stoi.get(word)
        if wid is not None:
            return [wid]
        return [self.stoi.get(ch, self.stoi[UNK]) for ch in word]

    def encode(self, tokens: list[str], markers: dict[int, list[str]] | None = None,
               max_length: int | None = None) -> Encoding:
        """[CLS] pieces... [SEP] with optional marker pieces between words.

        markers maps a word index to marker pieces inserted before it; the
        key len(tokens) appends trailing markers before [SEP].
        """
        ids = [self.stoi[CLS]]
        groups: list[list[int]] = []
        markers = markers or {}
        for i, tok in enumerate(tokens):
            for m in markers.get(i, ()):
                ids.append(self.stoi[m])
            group = []
            for pid in self.pieces_for_word(tok):
                group.append(len(ids))
                ids.append(pid)
            groups.append(group)
        for m in markers.get(len(tokens), ()):
            ids.append(self.stoi[m])
        ids.append(self.stoi[SEP])
        if max_length is not None and len(ids) > max_length:
            raise ValueError(f"encoded length {len(ids)} exceeds max {max_length}")
        return Encoding(ids=ids, word_groups=groups)

    def to_json(self) -> dict:
        return {"itos": self.itos}

    @classmethod
    def from_json(cls, doc: dict) -> "WordPieceVocab":
        vocab = cls.__new__(cls)
        vocab.itos = list(doc["itos"])
        vocab.stoi = {piece: i for i, piece in enumerate(vocab.itos)}
        return vocab
