"""Long-running protocol responder over stdio or TCP.

One JSON object per line. The server opens with a hello advertising the
capabilities its loaded artifacts cover, then answers requests in order,
echoing ids. Malformed input gets an error message with a null id and the
connection stays up; nothing is ever silently dropped.
"""

from __future__ import annotations

import json
import socketserver
import sys

from . import PROTOCOL_VERSION, STAGE_LABELS, TAG_NAMES, TASK_CAPABILITIES
from .model import Artifact


def _encode(message: dict) -> bytes:
    return json.dumps(message, ensure_ascii=False, separators=(",", ":")).encode("utf-8") + b"\n"


class AdapterServer:
    """Protocol logic shared by the stdio and TCP transports."""

    def __init__(self, artifacts: dict[str, Artifact]):
        if not artifacts:
            raise ValueError("serve needs at least one artifact")
        for task, artifact in artifacts.items():
            if artifact.task != task:
                raise ValueError(
                    f"artifact trained for {artifact.task!r} mounted as {task!r}"
                )
        self.artifacts = artifacts

    def hello(self) -> dict:
        return {
            "type": "hello",
            "version": PROTOCOL_VERSION,
            "capabilities": [TASK_CAPABILITIES[t] for t in TASK_CAPABILITIES
                             if t in self.artifacts],
            "tagset": list(TAG_NAMES),
            "labelset": list(STAGE_LABELS),
        }

    def handle_line(self, raw: bytes) -> dict:
        try:
            message = json.loads(raw.decode("utf-8"))
            if not isinstance(message, dict):
                raise ValueError("message must be a JSON object")
        except (ValueError, UnicodeDecodeError) as exc:
            return {"type": "error", "id": None, "message": f"malformed request: {exc}"}

        rid = message.get("id")
        if message.get("type") != "request":
            return {"type": "error", "id": rid,
                    "message": f"unsupported message type {message.get('type')!r}"}
        task = message.get("task")
        if task not in TASK_CAPABILITIES:
            return {"type": "error", "id": rid, "message": f"unknown task {task!r}"}
        artifact = self.artifacts.get(task)
        if artifact is None:
            return {"type": "error", "id": rid,
                    "message": f"no model mounted for task {task!r}"}
        tokens = message.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            return {"type": "error", "id": rid, "message": "tokens must be a string list"}

        try:
            if task == "sentence":
                logits = artifact.sentence_logits(tokens)
            elif task == "tag":
                logits = artifact.tag_logits(tokens)
            else:
                quad = message.get("quad") or [None] * 4
                parsed = []
                for pair in quad:
                    if pair is None:
                        parsed.append(None)
                    else:
                        start, end = int(pair[0]), int(pair[1])
                        if not (0 <= start <= end < len(tokens)):
                            raise ValueError(f"span {pair} out of bounds")
                        parsed.append((start, end))
                logits = artifact.quadruple_logits(tokens, parsed)
        except (ValueError, IndexError, TypeError) as exc:
            return {"type": "error", "id": rid, "message": str(exc)}
        return {"type": "response", "id": rid, "logits": logits}

    def serve_stream(self, rfile, wfile) -> None:
        wfile.write(_encode(self.hello()))
        wfile.flush()
        for raw in rfile:
            if not raw.strip():
                continue
            wfile.write(_encode(self.handle_line(raw)))
            wfile.flush()

    def serve_stdio(self) -> None:
        self.serve_stream(sys.stdin.buffer, sys.stdout.buffer)

    def serve_tcp(self, host: str, port: int) -> None:
        server_logic = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self) -> None:
                server_logic.serve_stream(self.rfile, self.wfile)

        class Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        with Server((host, port), Handler) as server:
            print(f"listening on {server.server_address[0]}:{server.server_address[1]}",
                  file=sys.stderr, flush=True)
            server.serve_forever()


def load_artifacts(paths: dict[str, str | None]) -> dict[str, Artifact]:
    artifacts = {}
    for task, path in paths.items():
        if path:
            artifacts[task] = Artifact.load(path)
    return artifacts
