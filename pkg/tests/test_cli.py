import json

import pytest

from pcflab.cli import EXIT_NO_RESULT, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestPcfCommands:
    def test_eval_apery(self, capsys):
        code, out, _ = run(
            capsys,
            "pcf", "eval", "--a", "34*n^3+51*n^2+27*n+5", "--b", "-n^6",
            "--depth", "500", "--digits", "100",
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["certified_digits"] >= 100
        assert payload["value"].startswith("4.99144423548424481209875767292918440650233838640236847")

    def test_fr(self, capsys):
        code, out, _ = run(
            capsys, "pcf", "fr", "--a", "34*n^3+51*n^2+27*n+5", "--b", "-n^6",
            "--max-depth", "512",
        )
        assert code == EXIT_OK
        assert json.loads(out)["verdict"] == "FactorialReduction"

    def test_usage_error(self, capsys):
        code, _, _ = run(capsys, "pcf", "eval", "--a", "n")
        assert code == EXIT_USAGE


class TestMatchCommand:
    def test_from_pcf(self, capsys):
        code, out, _ = run(
            capsys,
            "match", "--from-pcf", "34*n^3+51*n^2+27*n+5;-n^6", "--constants", "zeta3",
            "--depth", "500", "--digits", "80",
        )
        assert code == EXIT_OK
        assert json.loads(out)["coefficients"] == [6, 0, 0, 1]

    def test_no_result_exit_code(self, capsys):
        code, _, err = run(
            capsys,
            "match", "--from-pcf", "34*n^3+51*n^2+27*n+5;-n^6", "--constants", "catalan",
            "--depth", "500", "--digits", "60",
        )
        assert code == EXIT_NO_RESULT
        assert "no relation" in err


class TestCmfCommands:
    def test_verify(self, capsys):
        code, out, _ = run(capsys, "cmf", "verify", "--field", "zeta3", "--grid", "12")
        assert code == EXIT_OK and json.loads(out)["passed"]

    def test_limit(self, capsys):
        code, out, _ = run(
            capsys, "cmf", "limit", "--field", "zeta3", "--dir", "1,1",
            "--steps", "400", "--digits", "40",
        )
        assert code == EXIT_OK
        assert json.loads(out)["value"].startswith("0.8319")

    def test_topcf(self, capsys):
        code, out, _ = run(capsys, "cmf", "topcf", "--field", "zeta3", "--dir", "1,1")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["a"] == "34*n^3+51*n^2+27*n+5" and payload["b"] == "-n^6"

    def test_construct_and_field_file(self, capsys, tmp_path):
        code, out, _ = run(capsys, "cmf", "construct", "--degree", "2", "--c", "0,0,0,1")
        assert code == EXIT_OK
        payload = json.loads(out)
        path = tmp_path / "field.json"
        path.write_text(json.dumps({k: payload[k] for k in ("dimension", "vars", "matrices")}))
        code, out, _ = run(capsys, "cmf", "verify", "--field", str(path), "--grid", "8")
        assert code == EXIT_OK and json.loads(out)["passed"]

    def test_coboundary(self, capsys):
        code, out, _ = run(
            capsys, "cmf", "coboundary", "--field", "zeta3",
            "--u", '["1", "x", "0", "1"]',
        )
        assert code == EXIT_OK
        assert json.loads(out)["dimension"] == 2


class TestDeltaCommands:
    def test_closed(self, capsys):
        code, out, _ = run(capsys, "delta", "closed", "--field", "zeta3", "--dir", "1,1")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["eigenvalues"] == {"rational": "17", "root_coeff": "12", "radicand": 2}
        assert abs(payload["delta"] - 0.08) < 0.01

    def test_map_csv(self, capsys):
        code, out, _ = run(
            capsys, "delta", "map", "--field", "zeta3", "--xmax", "4", "--ymax", "4",
            "--digits", "120", "--steps", "200", "--out", "-",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "x,y,delta"
        assert len(lines) > 4


class TestZeta5Command:
    def test_combine(self, capsys):
        code, out, _ = run(capsys, "zeta5", "combine", "--r", "1,1,1,1", "--depth", "9")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["plan"]["coefficients"]["5"] == "1"
        assert abs(payload["delta"] + 0.717) < 0.05


class TestWorkCommand:
    def test_unreachable_server_distinct_exit(self, capsys, monkeypatch):
        import pcflab.grid.worker as worker_module

        monkeypatch.setattr(worker_module, "MAX_RETRIES", 2)
        code, _, err = run(capsys, "work", "--server", "http://127.0.0.1:9", "--worker-id", "w")
        assert code == EXIT_RUNTIME
        assert "failed" in err

    def test_family_command(self, capsys):
        code, out, _ = run(capsys, "family", "--kind", "zzz_sr", "--params", '{"s": 5, "R": 1}')
        assert code == EXIT_OK
        assert json.loads(out)["b"] == "-n^10-n^9"
