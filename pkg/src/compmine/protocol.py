"""Adapter wire protocol: newline-delimited JSON over stdio or TCP.

One JSON object per line, UTF-8. A server opens with a hello message, then
answers requests in order, echoing request ids. This module is the single
source of truth for message shapes on both sides of the wire.
"""

from __future__ import annotations

import json

from .core import NUM_STAGE_LABELS, NUM_TAGS, STAGE_LABELS, TAG_NAMES
from .errors import HandshakeFailure

PROTOCOL_VERSION = 1

CAP_SENTENCE = "sentence-2way"
CAP_TAG = "token-9tag"
CAP_QUADRUPLE = "quintuple-9label"
CAPABILITIES = (CAP_SENTENCE, CAP_TAG, CAP_QUADRUPLE)

TASK_SENTENCE = "sentence"
TASK_TAG = "tag"
TASK_QUADRUPLE = "quadruple"
TASKS = (TASK_SENTENCE, TASK_TAG, TASK_QUADRUPLE)

CAPABILITY_FOR_TASK = {
    TASK_SENTENCE: CAP_SENTENCE,
    TASK_TAG: CAP_TAG,
    TASK_QUADRUPLE: CAP_QUADRUPLE,
}

LOGIT_WIDTHS = {TASK_SENTENCE: 2, TASK_TAG: NUM_TAGS, TASK_QUADRUPLE: NUM_STAGE_LABELS}


def encode(message: dict) -> bytes:
    """One protocol line, key order fixed by the message dict."""
    return json.dumps(message, ensure_ascii=False, separators=(",", ":")).encode("utf-8") + b"\n"


def decode(line: bytes | str) -> dict:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("protocol message must be a JSON object")
    return obj


def make_hello(capabilities) -> dict:
    return {
        "type": "hello",
        "version": PROTOCOL_VERSION,
        "capabilities": list(capabilities),
        "tagset": list(TAG_NAMES),
        "labelset": list(STAGE_LABELS),
    }


def validate_hello(obj: dict) -> frozenset[str]:
    """Check a hello message; return the advertised capability set."""
    if obj.get("type") != "hello":
        raise HandshakeFailure(f"expected hello, got {obj.get('type')!r}")
    if obj.get("version") != PROTOCOL_VERSION:
        raise HandshakeFailure(f"unsupported protocol version {obj.get('version')!r}")
    caps = obj.get("capabilities")
    if not isinstance(caps, list) or not caps:
        raise HandshakeFailure("hello must advertise a non-empty capability list")
    unknown = [c for c in caps if c not in CAPABILITIES]
    if unknown:
        raise HandshakeFailure(f"unknown capabilities {unknown}")
    if CAP_TAG in caps and obj.get("tagset") != list(TAG_NAMES):
        raise HandshakeFailure("tagset does not match the 9-tag alphabet")
    if CAP_QUADRUPLE in caps and obj.get("labelset") != list(STAGE_LABELS):
        raise HandshakeFailure("labelset does not match the 9-label alphabet")
    return frozenset(caps)


def _span_pair(span) -> list[int] | None:
    if span is None:
        return None
    if hasattr(span, "start"):
        return [span.start, span.end]
    return [int(span[0]), int(span[1])]


def make_request(rid: int, task: str, tokens: list[str], quad=None) -> dict:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    msg = {"type": "request", "id": rid, "task": task, "tokens": list(tokens)}
    if task == TASK_QUADRUPLE:
        msg["quad"] = [_span_pair(s) for s in (quad or (None,) * 4)]
    return msg


def make_response(rid: int, logits) -> dict:
    return {"type": "response", "id": rid, "logits": logits}


def make_error(rid, message: str) -> dict:
    return {"type": "error", "id": rid, "message": str(message)}
