import json
import threading
import time
import urllib.request

import pytest

from pcflab.grid import (
    Coordinator,
    ResultStore,
    SearchScheme,
    chunk_scheme,
    serve_coordinator,
    verify_pipeline,
    worker_run,
)
from pcflab.grid.worker import scan_chunk


@pytest.fixture()
def store(tmp_path):
    return ResultStore(str(tmp_path / "results.jsonl"))


def apery_scheme(fr_depth=512):
    return SearchScheme.sigma("apery-box", 3, {3: (16, 18), 1: (-13, -11)}, (1, 2), fr_depth)


class TestSchemes:
    def test_sigma_contains_apery(self):
        scheme = apery_scheme()
        hits = [
            i
            for i in range(scheme.total())
            if scheme.decode(i) == (17, -12, 1)
        ]
        assert len(hits) == 1
        pcf = scheme.candidate(hits[0])
        assert str(pcf.a) == "34*n^3+51*n^2+27*n+5" and str(pcf.b) == "-n^6"

    def test_decode_bijective(self):
        scheme = apery_scheme()
        seen = {scheme.decode(i) for i in range(scheme.total())}
        assert len(seen) == scheme.total() == 18

    def test_empty_range_total_zero(self):
        scheme = SearchScheme.sigma("empty", 2, {2: (1, 0), 0: (0, 0)}, (1, 1))
        assert scheme.total() == 0
        assert chunk_scheme(scheme, 10) == []

    def test_box_total_125(self):
        scheme = SearchScheme.sigma("box", 2, {2: (-2, 2), 0: (-2, 2)}, (-2, 2))
        assert scheme.total() == 125

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            apery_scheme().decode(18)

    def test_degenerate_candidates_skipped(self):
        scheme = SearchScheme.sigma("degen", 2, {2: (0, 0), 0: (1, 1)}, (0, 0))
        assert scheme.candidate(0) is None  # B = 0

    def test_coeff_box_scheme(self):
        scheme = SearchScheme.coeff_box("box2", 1, 2, [(0, 1), (1, 1)], [(0, 0), (0, 0), (-1, -1)])
        assert scheme.total() == 2
        pcf = scheme.candidate(1)
        assert str(pcf.a) == "n+1" and str(pcf.b) == "-n^2"

    def test_chunking_examples(self):
        scheme = SearchScheme.sigma("box", 2, {2: (-2, 2), 0: (-2, 2)}, (-2, 2))
        chunks = chunk_scheme(scheme, 50)
        assert [c.count for c in chunks] == [50, 50, 25]
        assert chunks[1].start == 50
        single = SearchScheme.sigma("one", 2, {2: (1, 1), 0: (1, 1)}, (1, 1))
        assert len(chunk_scheme(single, 50)) == 1

    def test_json_round_trip(self):
        scheme = apery_scheme()
        assert SearchScheme.from_json(json.dumps(scheme.to_json())) == scheme


class TestDeterminism:
    def test_chunk_rescan_is_bit_identical(self):
        scheme = apery_scheme(fr_depth=512).to_json()
        first = scan_chunk(scheme, 0, 9)
        second = scan_chunk(scheme, 0, 9)
        assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


class TestCoordinator:
    def test_lease_and_exactly_once(self, store):
        coord = Coordinator([apery_scheme()], store, chunk_size=5, lease_seconds=60)
        c1 = coord.next_chunk("w1")
        c2 = coord.next_chunk("w2")
        assert c1.chunk_id != c2.chunk_id
        accepted, err = coord.submit(c1.chunk_id, "w1", [], "ok")
        assert accepted and err is None
        dup, err = coord.submit(c1.chunk_id, "w1", [], "ok")
        assert not dup and err is None  # acknowledged, dropped
        assert len(store.records()) == 1

    def test_expired_lease_reissued(self, store):
        coord = Coordinator([apery_scheme()], store, chunk_size=5, lease_seconds=0)
        c1 = coord.next_chunk("w1")
        time.sleep(0.01)
        c2 = coord.next_chunk("w2")
        assert c1.chunk_id == c2.chunk_id  # re-leased after expiry

    def test_unknown_and_unleased(self, store):
        coord = Coordinator([apery_scheme()], store, chunk_size=5)
        accepted, err = coord.submit("nope:0:5", "w1", [], "ok")
        assert err == "UnknownChunk"
        chunk = coord.next_chunk("w1")
        accepted, err = coord.submit(chunk.chunk_id, "stranger", [], "ok")
        assert err == "LeaseExpired"

    def test_status_counts(self, store):
        coord = Coordinator([apery_scheme()], store, chunk_size=5)
        chunk = coord.next_chunk("w1")
        coord.submit(chunk.chunk_id, "w1", [], "ok")
        status = coord.status()["apery-box"]
        assert status["chunks"] == 4 and status["done"] == 1
        assert status["candidates"] == 18


class TestHTTProtocol:
    def test_wire_protocol(self, store):
        coord, httpd, thread = serve_coordinator(
            [apery_scheme(fr_depth=512)], store, chunk_size=9, lease_seconds=60
        )
        addr = f"http://127.0.0.1:{httpd.server_address[1]}"
        try:
            with urllib.request.urlopen(f"{addr}/v1/chunk?worker=w1") as resp:
                payload = json.loads(resp.read())
            assert set(payload) == {"chunk_id", "scheme", "start", "count", "lease_seconds"}
            body = json.dumps(
                {
                    "chunk_id": payload["chunk_id"],
                    "worker": "w1",
                    "hits": [],
                    "status": "ok",
                }
            ).encode()
            req = urllib.request.Request(
                f"{addr}/v1/result", data=body, headers={"Content-Type": "application/json"}
            )
            with urllib.request.urlopen(req) as resp:
                assert json.loads(resp.read()) == {"accepted": True}
            with urllib.request.urlopen(req) as resp:
                assert json.loads(resp.read()) == {"accepted": False}  # duplicate
            # malformed result
            bad = urllib.request.Request(
                f"{addr}/v1/result", data=b'{"chunk_id": 3}', headers={"Content-Type": "application/json"}
            )
            try:
                urllib.request.urlopen(bad)
                assert False, "malformed result must 400"
            except urllib.error.HTTPError as exc:
                assert exc.code == 400 and json.loads(exc.read())["error"] == "MalformedResult"
            with urllib.request.urlopen(f"{addr}/v1/status") as resp:
                status = json.loads(resp.read())
            assert status["apery-box"]["done"] == 1
        finally:
            httpd.shutdown()

    def test_distributed_smoke_with_crash_and_duplicate(self, store):
        # acceptance-style: 2 workers, one injected crash, one duplicate post
        scheme = apery_scheme(fr_depth=512)
        coord, httpd, thread = serve_coordinator([scheme], store, chunk_size=5, lease_seconds=1)
        addr = f"http://127.0.0.1:{httpd.server_address[1]}"
        try:
            done1 = worker_run(addr, "w1", crash_after_fetch=2)  # crashes on its 2nd chunk
            assert done1 == 1
            time.sleep(1.05)  # abandoned lease expires
            done2 = worker_run(addr, "w2")
            assert coord.drained()
            assert done1 + done2 == 4
            # duplicate submission after drain: acknowledged, store unchanged
            records_before = len(store.records())
            body = json.dumps(
                {"chunk_id": "apery-box:0:5", "worker": "w1", "hits": [], "status": "ok"}
            ).encode()
            req = urllib.request.Request(
                f"{addr}/v1/result", data=body, headers={"Content-Type": "application/json"}
            )
            with urllib.request.urlopen(req) as resp:
                assert json.loads(resp.read()) == {"accepted": False}
            assert len(store.records()) == records_before
            hits = [h for r in store.records() for h in r.get("hits", [])]
            assert [h["a"] for h in hits] == ["34*n^3+51*n^2+27*n+5"]
        finally:
            httpd.shutdown()


class TestStore:
    def test_append_and_torn_line_isolation(self, tmp_path):
        store = ResultStore(str(tmp_path / "s.jsonl"))
        store.append({"chunk_id": "a:0:1", "hits": []})
        with open(store.path, "a") as fh:
            fh.write('{"torn": \n')  # corruption
        store.append({"chunk_id": "a:1:1", "hits": []})
        records = store.records()
        assert [r["chunk_id"] for r in records] == ["a:0:1", "a:1:1"]

    def test_compact_index(self, tmp_path):
        store = ResultStore(str(tmp_path / "s.jsonl"))
        store.append(
            {"chunk_id": "a:0:1", "hits": [{"a": "n", "b": "-n^2", "ln_s": 1.0, "dhat": 0.0, "verdict": "FactorialReduction"}]}
        )
        path = store.compact_index()
        with open(path) as fh:
            index = json.load(fh)
        assert index["_chunks"] == ["a:0:1"]
        assert "a=n;b=-n^2" in index["by_pcf"]


class TestPipeline:
    def test_apery_confirmed(self, store, catalog):
        hit = {
            "a": "34*n^3+51*n^2+27*n+5",
            "b": "-n^6",
            "ln_s": 6.52,
            "dhat": 0.01,
            "verdict": "FactorialReduction",
        }
        result = verify_pipeline(hit, ["zeta3"], scheme_depth=512, store=store, catalog=catalog)
        assert result.status == "confirmed"
        assert result.relation.coefficients == (6, 0, 0, 1)
        assert result.validated_at_2x
        assert store.records()[-1]["status"] == "confirmed"

    def test_non_reproducing_hit_rejected(self, store, catalog):
        hit = {
            "a": "34*n^3+51*n^2+27*n+6",
            "b": "-n^6",
            "ln_s": 3.4,
            "dhat": 2.9,
            "verdict": "Inconclusive",
        }
        result = verify_pipeline(hit, ["zeta3"], scheme_depth=256, store=store, catalog=catalog)
        assert result.status == "rejected"

    def test_table1_row4_unmatched_with_value(self, store, catalog):
        hit = {
            "a": "8*(n^5+(n+1)^5)-15*(n^3+(n+1)^3)+9*(2*n+1)",
            "b": "-64*n^10",
            "ln_s": 0.0,
            "dhat": 0.0,
            "verdict": "FactorialReduction",
        }
        result = verify_pipeline(hit, ["zeta5", "zeta3"], scheme_depth=512, store=store, catalog=catalog)
        assert result.status == "unmatched"
        assert result.relation is None
        assert result.value.startswith("1.2042")
