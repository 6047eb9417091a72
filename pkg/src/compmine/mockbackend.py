"""Scriptable protocol server with fixed outputs, for tests and dry runs.

Run as ``python -m compmine.mockbackend``. Speaks the adapter wire protocol
on stdio and answers every request with configurable constant logits, which
makes pipeline wiring and protocol conformance testable without any model.
"""

from __future__ import annotations

import argparse
import sys

from . import protocol
from .core import NUM_STAGE_LABELS, NUM_TAGS


def _parse_logits(text: str, width: int, flag: str) -> list[float]:
    values = [float(v) for v in text.split(",")]
    if len(values) != width:
        raise SystemExit(f"{flag} needs {width} comma-separated values")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--capabilities",
        default="sentence,tag,quadruple",
        help="comma-separated tasks to advertise",
    )
    parser.add_argument("--sentence-logits", default="0.0,1.0")
    parser.add_argument(
        "--tag-logits",
        default=",".join(["1.0"] + ["0.0"] * (NUM_TAGS - 1)),
        help="per-token logit row, repeated for every token",
    )
    parser.add_argument(
        "--quad-logits",
        default=",".join(["0.0"] * (NUM_STAGE_LABELS - 1) + ["1.0"]),
    )
    parser.add_argument(
        "--drop-last-row", action="store_true",
        help="return one tag row too few (alignment-contract violation)",
    )
    parser.add_argument(
        "--garbage-hello", action="store_true", help="emit a non-JSON hello line"
    )
    parser.add_argument(
        "--bad-version", action="store_true", help="advertise a wrong protocol version"
    )
    parser.add_argument(
        "--silent", action="store_true", help="never write anything (timeout probe)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout.buffer

    if args.silent:
        sys.stdin.buffer.read()
        return 0
    if args.garbage_hello:
        out.write(b"this is not json\n")
        out.flush()
        sys.stdin.buffer.read()
        return 0

    caps = [protocol.CAPABILITY_FOR_TASK[t.strip()] for t in args.capabilities.split(",") if t.strip()]
    hello = protocol.make_hello(caps)
    if args.bad_version:
        hello["version"] = 99
    out.write(protocol.encode(hello))
    out.flush()

    sentence_logits = _parse_logits(args.sentence_logits, 2, "--sentence-logits")
    tag_row = _parse_logits(args.tag_logits, NUM_TAGS, "--tag-logits")
    quad_logits = _parse_logits(args.quad_logits, NUM_STAGE_LABELS, "--quad-logits")

    for raw in sys.stdin.buffer:
        try:
            msg = protocol.decode(raw)
        except ValueError as exc:
            out.write(protocol.encode(protocol.make_error(None, f"malformed request: {exc}")))
            out.flush()
            continue
        rid = msg.get("id")
        task = msg.get("task")
        if msg.get("type") != "request" or task not in protocol.TASKS:
            out.write(protocol.encode(protocol.make_error(rid, "not a valid request")))
            out.flush()
            continue
        if task == protocol.TASK_SENTENCE:
            logits = sentence_logits
        elif task == protocol.TASK_TAG:
            n = len(msg.get("tokens", []))
            if args.drop_last_row:
                n = max(0, n - 1)
            logits = [tag_row for _ in range(n)]
        else:
            logits = quad_logits
        out.write(protocol.encode(protocol.make_response(rid, logits)))
        out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
