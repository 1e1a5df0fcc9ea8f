"""The chunk coordinator: leases, idempotent submission, persistence.

Execution is at-least-once: an expired lease is simply re-issued, and the
first complete result for a chunk wins (later duplicates are acknowledged
and dropped).  Results are cheap to re-verify downstream, so no voting is
needed.  Wire errors carry one of three codes: UnknownChunk (404) for ids
the coordinator never issued, LeaseExpired (409) for submissions from a
worker that never held the chunk, MalformedResult (400) for bad payloads.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from pcflab.grid.schemes import Chunk, SearchScheme, chunk_scheme
from pcflab.grid.store import ResultStore

DEFAULT_LEASE_SECONDS = 1800


class Coordinator:
    def __init__(
        self,
        schemes: list[SearchScheme],
        store: ResultStore,
        chunk_size: int = 10_000,
        lease_seconds: int = DEFAULT_LEASE_SECONDS,
    ):
        if not schemes:
            raise ValueError("register at least one scheme")
        self.schemes = {s.scheme_id: s for s in schemes}
        self.store = store
        self.lease_seconds = lease_seconds
        self.chunks: dict[str, Chunk] = {}
        self.order: list[str] = []
        for scheme in schemes:
            for chunk in chunk_scheme(scheme, chunk_size):
                self.chunks[chunk.chunk_id] = chunk
                self.order.append(chunk.chunk_id)
        self.done: set = store.completed_chunks() & set(self.chunks)
        self.leases: dict[str, tuple[str, float]] = {}
        self.granted: dict[str, set] = {}
        self._lock = threading.Lock()

    def next_chunk(self, worker: str):
        """Lease the first pending (or lease-expired) chunk; None when drained."""
        now = time.time()
        with self._lock:
            for cid in self.order:
                if cid in self.done:
                    continue
                lease = self.leases.get(cid)
                if lease is not None and lease[1] > now:
                    continue
                self.leases[cid] = (worker, now + self.lease_seconds)
                self.granted.setdefault(cid, set()).add(worker)
                return self.chunks[cid]
        return None

    def submit(self, chunk_id: str, worker: str, hits: list, status: str, wall_time: float = 0.0):
        """Returns (accepted, error_code). First complete result wins."""
        if chunk_id not in self.chunks:
            return False, "UnknownChunk"
        with self._lock:
            if worker not in self.granted.get(chunk_id, set()):
                return False, "LeaseExpired"
            if chunk_id in self.done:
                return False, None  # duplicate: acknowledged, store untouched
            self.done.add(chunk_id)
            self.leases.pop(chunk_id, None)
        self.store.append(
            {
                "chunk_id": chunk_id,
                "worker": worker,
                "hits": hits,
                "status": status,
                "wall_time": wall_time,
                "stored_at": time.time(),
            }
        )
        return True, None

    def drained(self) -> bool:
        with self._lock:
            return len(self.done) == len(self.chunks)

    def status(self) -> dict:
        now = time.time()
        with self._lock:
            per_scheme: dict = {}
            for cid, chunk in self.chunks.items():
                entry = per_scheme.setdefault(
                    chunk.scheme_id,
                    {"chunks": 0, "done": 0, "leased": 0, "pending": 0, "candidates": 0},
                )
                entry["chunks"] += 1
                entry["candidates"] += chunk.count
                if cid in self.done:
                    entry["done"] += 1
                elif cid in self.leases and self.leases[cid][1] > now:
                    entry["leased"] += 1
                else:
                    entry["pending"] += 1
            return per_scheme


class _Handler(BaseHTTPRequestHandler):
    coordinator: Coordinator = None  # set by serve_coordinator

    def log_message(self, *args):  # tests stay quiet
        pass

    def _reply(self, code: int, payload: dict | None):
        body = b"" if payload is None else json.dumps(payload).encode()
        self.send_response(code)
        if body:
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/v1/chunk":
            worker = parse_qs(url.query).get("worker", ["anonymous"])[0]
            chunk = self.coordinator.next_chunk(worker)
            if chunk is None:
                self._reply(204, None)
                return
            scheme = self.coordinator.schemes[chunk.scheme_id]
            self._reply(
                200,
                {
                    "chunk_id": chunk.chunk_id,
                    "scheme": scheme.to_json(),
                    "start": chunk.start,
                    "count": chunk.count,
                    "lease_seconds": self.coordinator.lease_seconds,
                },
            )
            return
        if url.path == "/v1/status":
            self._reply(200, self.coordinator.status())
            return
        self._reply(404, {"error": "NotFound"})

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/v1/result":
            self._reply(404, {"error": "NotFound"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length))
            chunk_id = payload["chunk_id"]
            worker = payload["worker"]
            hits = payload["hits"]
            status = payload["status"]
            if status not in ("ok", "error") or not isinstance(hits, list):
                raise ValueError
            for hit in hits:
                if not {"a", "b", "ln_s", "dhat", "verdict"} <= set(hit):
                    raise ValueError
        except (KeyError, ValueError, json.JSONDecodeError):
            self._reply(400, {"error": "MalformedResult"})
            return
        accepted, error = self.coordinator.submit(
            chunk_id, worker, hits, status, payload.get("wall_time", 0.0)
        )
        if error == "UnknownChunk":
            self._reply(404, {"error": "UnknownChunk"})
        elif error == "LeaseExpired":
            self._reply(409, {"error": "LeaseExpired"})
        else:
            self._reply(200, {"accepted": accepted})


def serve_coordinator(
    schemes: list[SearchScheme],
    store: ResultStore,
    port: int = 0,
    chunk_size: int = 10_000,
    lease_seconds: int = DEFAULT_LEASE_SECONDS,
):
    """Start the coordinator HTTP service on a background thread.

    Returns (coordinator, httpd, thread); callers own httpd.shutdown().
    """
    coordinator = Coordinator(schemes, store, chunk_size=chunk_size, lease_seconds=lease_seconds)
    handler = type("BoundHandler", (_Handler,), {"coordinator": coordinator})
    httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
    thread = threading.Thread(target=httpd.serve_forever, name="coordinator", daemon=True)
    thread.start()
    return coordinator, httpd, thread
