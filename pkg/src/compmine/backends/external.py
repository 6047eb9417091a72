"""Client for external model processes speaking the adapter wire protocol.

External backends host heavyweight encoder models out-of-process, either as
a spawned child on stdio or over TCP. One connection handles one in-order
request stream; open several connections for concurrency.
"""

from __future__ import annotations

import select
import socket
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from ..errors import (
    AdapterTimeout,
    AlignmentError,
    BackendUnavailable,
    HandshakeFailure,
)
from .. import protocol

DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class ChildProcessTransport:
    argv: tuple[str, ...]


@dataclass(frozen=True)
class TcpTransport:
    host: str
    port: int


@dataclass(frozen=True)
class BackendDescriptor:
    """Name, capability set, and how to reach the backend."""

    name: str
    capabilities: frozenset[str]
    kind: str  # "native" | "external"
    transport: ChildProcessTransport | TcpTransport | None = None

    def __post_init__(self) -> None:
        if not self.capabilities:
            raise ValueError("capability set must be non-empty")
        if self.kind == "external" and self.transport is None:
            raise ValueError("external descriptors must carry a transport")


class _ProcessChannel:
    """Line channel over a child process's stdio with read deadlines."""

    def __init__(self, argv: tuple[str, ...]):
        try:
            self.proc = subprocess.Popen(
                list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise BackendUnavailable(f"cannot spawn {argv[0]}: {exc}") from exc
        self._buf = b""

    def send_line(self, line: bytes) -> None:
        try:
            self.proc.stdin.write(line)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendUnavailable("backend process closed its stdin") from exc

    def recv_line(self, timeout: float) -> bytes:
        deadline = time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise AdapterTimeout(f"no reply within {timeout:.1f}s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = self.proc.stdout.read1(65536)
            if not chunk:
                raise BackendUnavailable("backend process closed its stdout")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()


class _TcpChannel:
    def __init__(self, host: str, port: int, timeout: float):
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except socket.timeout as exc:
            raise AdapterTimeout(f"no connection to {host}:{port} within {timeout:.1f}s") from exc
        except OSError as exc:
            raise BackendUnavailable(f"cannot connect to {host}:{port}: {exc}") from exc
        self._buf = b""

    def send_line(self, line: bytes) -> None:
        try:
            self.sock.sendall(line)
        except OSError as exc:
            raise BackendUnavailable("backend connection lost") from exc

    def recv_line(self, timeout: float) -> bytes:
        self.sock.settimeout(timeout)
        while b"\n" not in self._buf:
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout as exc:
                raise AdapterTimeout(f"no reply within {timeout:.1f}s") from exc
            except OSError as exc:
                raise BackendUnavailable("backend connection lost") from exc
            if not chunk:
                raise BackendUnavailable("backend closed the connection")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class ExternalBackend:
    """Handle to a connected adapter process; one in-order request stream."""

    def __init__(self, descriptor: BackendDescriptor, channel, capabilities: frozenset[str],
                 timeout: float):
        self.descriptor = descriptor
        self._channel = channel
        self.capabilities = capabilities
        self.timeout = timeout
        self._next_id = 0

    def _roundtrip(self, task: str, tokens: list[str], quad=None) -> list:
        rid = self._next_id
        self._next_id += 1
        self._channel.send_line(protocol.encode(protocol.make_request(rid, task, tokens, quad)))
        line = self._channel.recv_line(self.timeout)
        try:
            msg = protocol.decode(line)
        except ValueError as exc:
            raise BackendUnavailable(f"invalid protocol line from backend: {exc}") from exc
        if msg.get("type") == "error":
            raise BackendUnavailable(f"backend error: {msg.get('message')}")
        if msg.get("type") != "response" or msg.get("id") != rid:
            raise BackendUnavailable(
                f"expected response id {rid}, got {msg.get('type')}/{msg.get('id')}"
            )
        return msg.get("logits")

    def classify_sentences(self, sentences) -> list[np.ndarray]:
        return [
            np.asarray(self._roundtrip(protocol.TASK_SENTENCE, s.token_texts()), dtype=float)
            for s in sentences
        ]

    def tag_tokens(self, sentences) -> list[np.ndarray]:
        out = []
        for s in sentences:
            rows = np.atleast_2d(
                np.asarray(self._roundtrip(protocol.TASK_TAG, s.token_texts()), dtype=float)
            )
            if rows.shape[0] != len(s):
                raise AlignmentError(
                    f"backend returned {rows.shape[0]} rows for {len(s)} tokens"
                )
            out.append(rows)
        return out

    def classify_quadruple(self, sentence, quad) -> np.ndarray:
        return np.asarray(
            self._roundtrip(protocol.TASK_QUADRUPLE, sentence.token_texts(), quad),
            dtype=float,
        )

    def close(self) -> None:
        self._channel.close()

    def __enter__(self) -> "ExternalBackend":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def connect_external(descriptor: BackendDescriptor,
                     timeout: float = DEFAULT_TIMEOUT) -> ExternalBackend:
    """Open the transport, complete the hello handshake, verify capabilities."""
    transport = descriptor.transport
    if isinstance(transport, ChildProcessTransport):
        channel = _ProcessChannel(transport.argv)
    elif isinstance(transport, TcpTransport):
        channel = _TcpChannel(transport.host, transport.port, timeout)
    else:
        raise ValueError(f"descriptor {descriptor.name!r} has no usable transport")

    try:
        line = channel.recv_line(timeout)
    except BackendUnavailable as exc:
        channel.close()
        raise HandshakeFailure(f"backend closed before hello: {exc}") from exc
    except AdapterTimeout:
        channel.close()
        raise
    try:
        advertised = protocol.validate_hello(protocol.decode(line))
    except ValueError as exc:
        channel.close()
        raise HandshakeFailure(f"malformed hello line: {exc}") from exc
    except HandshakeFailure:
        channel.close()
        raise
    missing = descriptor.capabilities - advertised
    if missing:
        channel.close()
        raise HandshakeFailure(f"backend does not advertise {sorted(missing)}")
    return ExternalBackend(descriptor, channel, advertised, timeout)
