"""Run schemes over loopback TCP, one listener per server.

Each exchange is one connection carrying one query frame and one reply:

    u32 length (payload bytes + 1) | u8 tag | payload

Tags are 0x01 query, 0x02 answer and 0x03 error. Query payloads use the
value codec in :mod:`graphpir.schemes.codec`; answers are encoded bit
vectors. Rate accounting counts the answer bits only.
"""

from __future__ import annotations

import random
import socket
import socketserver
import struct
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ConsistencyError, FrameError, GraphPIRError, MismatchError, TransportError
from .graphcore import Bits, FileAssignment
from .schemes.base import AnswerSet, QuerySet, Scheme
from .schemes.codec import decode_bits, decode_value, encode_bits, encode_value

TAG_QUERY = 0x01
TAG_ANSWER = 0x02
TAG_ERROR = 0x03
TAGS = (TAG_QUERY, TAG_ANSWER, TAG_ERROR)
MAX_PAYLOAD = 1 << 24
HEADER = struct.Struct(">IB")
DEFAULT_TIMEOUT = 10.0

Endpoint = tuple[str, int]


class OversizedFrame(FrameError):
    """The length prefix announces more than the maximum payload."""


def encode_frame(tag: int, payload: bytes) -> bytes:
    if tag not in TAGS:
        raise FrameError(f"unknown frame tag 0x{tag:02x}")
    if len(payload) > MAX_PAYLOAD:
        raise OversizedFrame(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    return HEADER.pack(len(payload) + 1, tag) + payload


def decode_frame(data: bytes) -> tuple[int, bytes]:
    """Parse exactly one complete frame."""
    if len(data) < 4:
        raise FrameError("frame shorter than its length prefix")
    (length,) = struct.unpack_from(">I", data, 0)
    _check_length(length)
    if len(data) != 4 + length:
        raise FrameError(f"frame announces {length} bytes after the prefix, has {len(data) - 4}")
    tag = data[4]
    if tag not in TAGS:
        raise FrameError(f"unknown frame tag 0x{tag:02x}")
    return tag, data[5:]


def _check_length(length: int) -> None:
    if length == 0:
        raise FrameError("length prefix 0 leaves no room for the tag")
    if length - 1 > MAX_PAYLOAD:
        raise OversizedFrame(f"announced payload of {length - 1} bytes exceeds {MAX_PAYLOAD}")


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    while n:
        chunk = sock.recv(min(n, 1 << 16))
        if not chunk:
            raise FrameError("connection closed mid-frame")
        chunks.append(chunk)
        n -= len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    (length,) = struct.unpack(">I", _recv_exact(sock, 4))
    _check_length(length)
    body = _recv_exact(sock, length)
    if body[0] not in TAGS:
        raise FrameError(f"unknown frame tag 0x{body[0]:02x}")
    return body[0], body[1:]


# -- server side --------------------------------------------------------------


class _AnswerHandler(socketserver.BaseRequestHandler):
    """Answers one query from the listener's local files.

    Only ever reads from and writes to the accepted connection; it holds no
    peer addresses, so servers cannot talk to each other.
    """

    def handle(self) -> None:
        listener: _Listener = self.server  # type: ignore[assignment]
        self.request.settimeout(DEFAULT_TIMEOUT)
        try:
            tag, payload = read_frame(self.request)
        except OversizedFrame:
            return
        except (FrameError, OSError) as exc:
            self._reply(TAG_ERROR, str(exc).encode())
            return
        try:
            if tag != TAG_QUERY:
                raise FrameError(f"expected a query frame, got tag 0x{tag:02x}")
            if not payload:
                raise FrameError("empty query payload")
            query = decode_value(payload)
            bits = listener.scheme.answer(listener.server_index, query, listener.local)
            self._reply(TAG_ANSWER, encode_bits(bits))
        except GraphPIRError as exc:
            self._reply(TAG_ERROR, f"{type(exc).__name__}: {exc}".encode())

    def _reply(self, tag: int, payload: bytes) -> None:
        try:
            self.request.sendall(encode_frame(tag, payload))
        except OSError:
            pass


class _Listener(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: Endpoint, scheme: Scheme, server_index: int, local: dict[int, Bits]):
        self.scheme = scheme
        self.server_index = server_index
        self.local = local
        super().__init__(address, _AnswerHandler)


@dataclass
class RunningServer:
    """Handle on a background listener; use as a context manager or call ``stop``."""

    server: int
    host: str
    port: int
    files: tuple[int, ...]
    _listener: _Listener = field(repr=False)
    _thread: threading.Thread = field(repr=False)

    @property
    def endpoint(self) -> Endpoint:
        return (self.host, self.port)

    def stop(self) -> None:
        self._listener.shutdown()
        self._listener.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> RunningServer:
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(scheme: Scheme, files: FileAssignment, server: int, host: str = "127.0.0.1", port: int = 0) -> RunningServer:
    """Start a listener for ``server`` holding only its incident files.

    ``port=0`` picks a free port; the chosen one is on the returned handle.
    """
    if server not in scheme.graph.vertices():
        raise GraphPIRError(f"server {server} is not a vertex of {scheme.graph.describe()}")
    local = files.local(scheme.graph, server)
    listener = _Listener((host, port), scheme, server, local)
    thread = threading.Thread(
        target=listener.serve_forever, kwargs={"poll_interval": 0.05}, name=f"pir-server-{server}", daemon=True
    )
    thread.start()
    bound_host, bound_port = listener.server_address[:2]
    return RunningServer(server, bound_host, bound_port, tuple(sorted(local)), listener, thread)


def serve_all(scheme: Scheme, files: FileAssignment, host: str = "127.0.0.1", port_base: int = 0) -> list[RunningServer]:
    """One listener per vertex; ports ``port_base + i - 1`` or ephemeral when 0."""
    running = []
    try:
        for s in scheme.graph.vertices():
            running.append(serve(scheme, files, s, host, port_base + s - 1 if port_base else 0))
    except BaseException:
        for r in running:
            r.stop()
        raise
    return running


# -- client side --------------------------------------------------------------


@dataclass
class ServerTraffic:
    server: int
    endpoint: str
    upload_bytes: int
    download_bytes: int
    download_bits: int


@dataclass
class SessionLog:
    scheme: str
    graph: str
    theta: int
    traffic: list[ServerTraffic]
    verdict: str
    duration_s: float

    @property
    def download_bits(self) -> int:
        return sum(t.download_bits for t in self.traffic)

    @property
    def upload_bytes(self) -> int:
        return sum(t.upload_bytes for t in self.traffic)

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "graph": self.graph,
            "theta": self.theta,
            "servers": [asdict(t) for t in self.traffic],
            "download_bits": self.download_bits,
            "upload_bytes": self.upload_bytes,
            "verdict": self.verdict,
            "duration_s": self.duration_s,
        }


def _exchange(endpoint: Endpoint, query, timeout: float) -> tuple[Bits, int, int]:
    payload = encode_value(query)
    try:
        with socket.create_connection(endpoint, timeout=timeout) as sock:
            sock.sendall(encode_frame(TAG_QUERY, payload))
            tag, reply = read_frame(sock)
    except OSError as exc:
        raise TransportError(f"endpoint {endpoint[0]}:{endpoint[1]}: {exc}") from exc
    except FrameError as exc:
        raise TransportError(f"endpoint {endpoint[0]}:{endpoint[1]} sent a malformed reply: {exc}") from exc
    if tag == TAG_ERROR:
        raise TransportError(f"endpoint {endpoint[0]}:{endpoint[1]} refused the query: {reply.decode(errors='replace')}")
    if tag != TAG_ANSWER:
        raise TransportError(f"endpoint {endpoint[0]}:{endpoint[1]} replied with tag 0x{tag:02x}")
    try:
        bits = decode_bits(reply)
    except FrameError as exc:
        raise TransportError(f"endpoint {endpoint[0]}:{endpoint[1]} sent an undecodable answer: {exc}") from exc
    return bits, len(payload), len(reply)


def retrieve(
    scheme: Scheme,
    endpoints: Sequence[Endpoint],
    theta: int,
    rng: random.Random,
    concurrent: bool = False,
    expected: Bits | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> tuple[Bits, SessionLog]:
    """Fetch file ``theta`` from live listeners; endpoint i serves vertex i.

    Queries come from ``rng`` exactly as in :meth:`Scheme.run`, so the same
    seed reproduces the in-process result. When ``expected`` is given, a
    different decoded file raises :class:`MismatchError`.
    """
    n = scheme.graph.n_vertices
    if len(endpoints) != n:
        raise TransportError(f"{scheme.graph.describe()} needs {n} endpoints, got {len(endpoints)}")
    scheme.check_theta(theta)
    start = time.perf_counter()
    qs: QuerySet = scheme.sample_queries(theta, rng)
    jobs = [(endpoints[s - 1], qs[s]) for s in scheme.graph.vertices()]
    if concurrent:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda job: _exchange(job[0], job[1], timeout), jobs))
    else:
        results = [_exchange(ep, q, timeout) for ep, q in jobs]
    answers = AnswerSet(tuple(bits for bits, _, _ in results))
    traffic = [
        ServerTraffic(s, f"{ep[0]}:{ep[1]}", up, down, len(bits))
        for s, ((bits, up, down), (ep, _)) in enumerate(zip(results, jobs), start=1)
    ]
    analytic = sum(scheme.answer_lengths())
    if answers.total_bits != analytic:
        raise ConsistencyError(f"downloaded {answers.total_bits} answer bits, scheme declares {analytic}")
    got = scheme.reconstruct(theta, qs, answers)
    if expected is not None and tuple(got) != tuple(expected):
        raise MismatchError(f"file {theta} decoded over the wire differs from the expected contents")
    verdict = "match" if expected is not None else "decoded"
    log = SessionLog(scheme.kind, scheme.graph.describe(), theta, traffic, verdict, time.perf_counter() - start)
    return got, log


def parse_endpoints(text: str) -> list[Endpoint]:
    """``host:port`` per line; blank lines and ``#`` comments are skipped."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        host, sep, port = line.rpartition(":")
        if not sep or not host or not port.isdigit() or not 0 < int(port) < 65536:
            raise GraphPIRError(f"line {lineno}: expected host:port, got {raw!r}")
        out.append((host, int(port)))
    return out


def read_endpoints(path: str | Path) -> list[Endpoint]:
    return parse_endpoints(Path(path).read_text())
