"""The worker loop: fetch a chunk, test every candidate, post the hits.

Hits are factorial-reduction positives plus Inconclusive verdicts (borderline
growth deserves the deeper on-site retest).  Candidates inside a chunk can be
spread over a process pool; the network loop itself stays sequential.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from concurrent.futures import ProcessPoolExecutor

from pcflab.fr import Verdict, classify_fr
from pcflab.grid.schemes import SearchScheme
from pcflab.pcf import TerminatedFraction

MAX_RETRIES = 5


class WorkerError(RuntimeError):
    """Network failure after bounded retries; maps to a distinct exit code."""


def _get_json(url: str, timeout: float):
    attempt = 0
    while True:
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                if resp.status == 204:
                    return None
                return json.loads(resp.read())
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            attempt += 1
            if attempt >= MAX_RETRIES:
                raise WorkerError(f"GET {url} failed after {attempt} attempts: {exc}")
            time.sleep(0.2 * 2**attempt)


def _post_json(url: str, payload: dict, timeout: float):
    body = json.dumps(payload).encode()
    attempt = 0
    while True:
        req = urllib.request.Request(
            url, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return json.loads(resp.read())
        except urllib.error.HTTPError as exc:
            # protocol errors are final; the chunk will be re-leased
            return {"error": exc.read().decode(errors="replace"), "status": exc.code}
        except (urllib.error.URLError, OSError) as exc:
            attempt += 1
            if attempt >= MAX_RETRIES:
                raise WorkerError(f"POST {url} failed after {attempt} attempts: {exc}")
            time.sleep(0.2 * 2**attempt)


def scan_candidate(scheme_json: dict, index: int):
    """Classify one candidate; returns a wire hit record or None."""
    scheme = SearchScheme.from_json(scheme_json)
    pcf = scheme.candidate(index)
    if pcf is None:
        return None
    try:
        estimate = classify_fr(pcf, scheme.fr_depth)
    except (TerminatedFraction, ArithmeticError):
        return None
    if estimate.verdict is Verdict.NO_REDUCTION:
        return None
    return {
        "a": str(pcf.a),
        "b": str(pcf.b),
        "ln_s": estimate.ln_s,
        "dhat": estimate.dhat,
        "verdict": estimate.verdict.value,
    }


def scan_chunk(scheme_json: dict, start: int, count: int, parallelism: int = 1) -> list:
    indices = range(start, start + count)
    if parallelism <= 1:
        hits = [scan_candidate(scheme_json, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            hits = list(pool.map(scan_candidate, [scheme_json] * len(indices), indices, chunksize=8))
    return [h for h in hits if h is not None]


def worker_run(
    server: str,
    worker_id: str,
    parallelism: int = 1,
    timeout: float = 30.0,
    max_chunks: int | None = None,
    crash_after_fetch: int | None = None,
) -> int:
    """Fetch-scan-post until the coordinator drains (returns chunk count).

    crash_after_fetch fetches that many chunks and then abandons the last one
    without posting (the lease-recovery path used in tests).
    """
    server = server.rstrip("/")
    completed = 0
    fetched = 0
    while True:
        if max_chunks is not None and completed >= max_chunks:
            return completed
        reply = _get_json(f"{server}/v1/chunk?worker={worker_id}", timeout)
        if reply is None:
            return completed
        fetched += 1
        if crash_after_fetch is not None and fetched >= crash_after_fetch:
            return completed  # simulated crash: lease silently abandoned
        t0 = time.time()
        hits = scan_chunk(reply["scheme"], reply["start"], reply["count"], parallelism)
        _post_json(
            f"{server}/v1/result",
            {
                "chunk_id": reply["chunk_id"],
                "worker": worker_id,
                "hits": hits,
                "status": "ok",
                "wall_time": time.time() - t0,
            },
            timeout,
        )
        completed += 1
