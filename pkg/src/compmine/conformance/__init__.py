"""Golden-transcript conformance suite for the adapter wire protocol.

Bundled transcripts exercise the hello handshake, response shape contracts,
and error handling. Any server implementation (the built-in mock or a real
adapter process) passes by replaying them over stdio.
"""

from __future__ import annotations

import json
import math
from importlib import resources

from ..backends.external import _ProcessChannel
from .. import protocol


class ConformanceFailure(AssertionError):
    """A server broke the protocol contract during transcript replay."""


def list_transcripts() -> list[str]:
    root = resources.files(__package__)
    return sorted(
        entry.name for entry in root.iterdir() if entry.name.endswith(".json")
    )


def load_transcript(name: str) -> dict:
    return json.loads(
        resources.files(__package__).joinpath(name).read_text(encoding="utf-8")
    )


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _check_hello(obj: dict, spec: dict) -> None:
    caps = protocol.validate_hello(obj)
    needed = set(spec.get("capabilities_superset_of", []))
    if not needed <= caps:
        raise ConformanceFailure(
            f"hello advertises {sorted(caps)}, needs at least {sorted(needed)}"
        )


def _check_shape(logits, rows, width) -> None:
    if rows is None:
        values = logits
        if not isinstance(values, list) or len(values) != width:
            raise ConformanceFailure(f"expected flat logits of width {width}, got {logits!r}")
        rows_list = [values]
    else:
        if not isinstance(logits, list) or len(logits) != rows:
            raise ConformanceFailure(f"expected {rows} logit rows, got {logits!r}")
        rows_list = logits
        for row in rows_list:
            if not isinstance(row, list) or len(row) != width:
                raise ConformanceFailure(f"expected rows of width {width}, got {row!r}")
    for row in rows_list:
        for v in row:
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConformanceFailure(f"non-finite logit {v!r}")


def _check_expect(msg: dict, expect: dict) -> None:
    for key in ("type", "id", "message_contains"):
        if key == "message_contains":
            continue
        if key in expect and msg.get(key) != expect[key]:
            raise ConformanceFailure(
                f"field {key}: expected {expect[key]!r}, got {msg.get(key)!r}"
            )
    if "message_contains" in expect:
        if expect["message_contains"] not in str(msg.get("message", "")):
            raise ConformanceFailure(
                f"error message {msg.get('message')!r} lacks "
                f"{expect['message_contains']!r}"
            )
    if "logits" in expect:
        if _canonical(msg.get("logits")) != _canonical(expect["logits"]):
            raise ConformanceFailure(
                f"logits mismatch: {msg.get('logits')!r} != {expect['logits']!r}"
            )
    if "shape" in expect:
        _check_shape(msg.get("logits"), expect["shape"].get("rows"),
                     expect["shape"]["width"])


def replay_transcript(argv, transcript: dict, timeout: float = 30.0) -> None:
    """Replay one transcript against a server process; raise on any breach."""
    channel = _ProcessChannel(tuple(argv))
    try:
        hello = protocol.decode(channel.recv_line(timeout))
        _check_hello(hello, transcript.get("hello", {}))
        for step in transcript.get("steps", []):
            if "send_raw" in step:
                channel.send_line(step["send_raw"].encode("utf-8") + b"\n")
            else:
                channel.send_line(protocol.encode(step["send"]))
            reply = protocol.decode(channel.recv_line(timeout))
            _check_expect(reply, step["expect"])
    finally:
        channel.close()


def run_suite(argv, timeout: float = 30.0) -> list[str]:
    """Replay every bundled transcript; returns the names that passed."""
    passed = []
    for name in list_transcripts():
        replay_transcript(argv, load_transcript(name), timeout=timeout)
        passed.append(name)
    return passed
