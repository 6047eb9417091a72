"""Reference external backend for the comparative-mining adapter protocol.

Serves transformer encoder models over newline-delimited JSON (stdio or
TCP) for the three pipeline capabilities, and fine-tunes them on canonical
JSONL datasets. Consumes the pipeline toolkit only through its wire
protocol and file formats.
"""

__version__ = "0.1.0"

# Contract constants mirrored from the wire protocol specification.
PROTOCOL_VERSION = 1

TAG_NAMES = (
    "O",
    "B-SUB", "I-SUB",
    "B-OBJ", "I-OBJ",
    "B-ASP", "I-ASP",
    "B-PRED", "I-PRED",
)

COMPARISON_LABELS = ("DIF", "EQL", "SUP+", "SUP-", "SUP", "COM+", "COM-", "COM")
STAGE_LABELS = COMPARISON_LABELS + ("NONE",)

CAP_SENTENCE = "sentence-2way"
CAP_TAG = "token-9tag"
CAP_QUADRUPLE = "quintuple-9label"

TASK_CAPABILITIES = {
    "sentence": CAP_SENTENCE,
    "tag": CAP_TAG,
    "quadruple": CAP_QUADRUPLE,
}

TASK_WIDTHS = {"sentence": 2, "tag": len(TAG_NAMES), "quadruple": len(STAGE_LABELS)}
