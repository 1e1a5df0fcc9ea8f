"""Append-only result persistence.

Records go to a line-delimited JSON file (one object per line, flushed per
write); a compacted index keyed by canonical Pcf text can be rebuilt at any
time.  Corruption stays isolated to single lines, and two stores merge by
concatenation.
"""

from __future__ import annotations

import json
import os
import threading
import time


class ResultStore:
    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def records(self) -> list[dict]:
        if not os.path.exists(self.path):
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError:
                    continue  # a torn line must not poison the rest
        return out

    def completed_chunks(self) -> set:
        return {r["chunk_id"] for r in self.records() if "chunk_id" in r}

    def compact_index(self, index_path: str | None = None) -> str:
        """Rewrite the store as one JSON object keyed by canonical Pcf text.

        Later records win; records without hits contribute nothing but their
        chunk ids are preserved under "_chunks"."""
        index_path = index_path or self.path + ".index"
        by_pcf: dict = {}
        chunks = []
        for record in self.records():
            if "chunk_id" in record:
                chunks.append(record["chunk_id"])
            for hit in record.get("hits", []):
                key = f"a={hit['a']};b={hit['b']}"
                by_pcf[key] = hit
            if "pcf" in record:
                key = f"a={record['pcf']['a']};b={record['pcf']['b']}"
                by_pcf[key] = record
        payload = {"_chunks": sorted(set(chunks)), "by_pcf": by_pcf, "compacted_at": time.time()}
        tmp = index_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
        os.replace(tmp, index_path)
        return index_path
