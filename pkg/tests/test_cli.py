import json

import pytest

from fiberbergman.cli import m_spec_parse, run, t_grid_parse
from fiberbergman.errors import GridSpecError, UsageError
from fiberbergman.family import CENTRAL


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, l.split(","))) for l in lines[1:]]


class TestGridParse:
    def test_log(self):
        assert t_grid_parse("log:1e-2..1:3") == pytest.approx([0.01, 0.1, 1.0])

    def test_lin(self):
        assert t_grid_parse("lin:0.5..1:3") == pytest.approx([0.5, 0.75, 1.0])

    def test_list(self):
        assert t_grid_parse("central,1") == [CENTRAL, 1.0]

    @pytest.mark.parametrize("bad", ["log:1..1e-2:3", "log:0..1:3", "log:1e-2..1:1", "lin:-1..1:3", "0", "a,b", ""])
    def test_errors(self, bad):
        with pytest.raises(GridSpecError):
            t_grid_parse(bad)

    def test_m_spec(self):
        assert m_spec_parse("1..4") == [1, 2, 3, 4]
        assert m_spec_parse("2,4,8") == [2, 4, 8]
        with pytest.raises(UsageError):
            m_spec_parse("0..2")


class TestRun:
    def test_h0(self, capsys):
        assert run(["h0", "--family", "conic.json", "--m", "1..6", "--t-grid", "log:1e-4..1:9"]) == 0
        header, rows = table(capsys.readouterr().out)
        assert header == ["m", "t", "h0"]
        assert len(rows) == 60
        assert all(int(r["h0"]) == 2 * int(r["m"]) + 1 for r in rows)

    def test_continuity(self, capsys):
        argv = ["continuity", "--family", "conic.json", "--m", "1", "--point", "1,0,1",
                "--t-grid", "log:1e-4..1e-1:7"]
        assert run(argv) == 0
        _, rows = table(capsys.readouterr().out)
        gaps = [float(r["gap"]) for r in sorted(rows, key=lambda r: -float(r["t_re"]))]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_phi(self, capsys):
        assert run(["phi", "--family", "conic.json", "--m", "2,4,8", "--t", "central,1,0.1",
                    "--resolution", "32"]) == 0
        _, rows = table(capsys.readouterr().out)
        for t in ("central", "1.0", "0.1"):
            col = [float(r["phi"]) for r in rows if r["t"] == t]
            assert col == sorted(col, reverse=True) and len(col) == 3

    def test_rees(self, capsys):
        assert run(["rees", "--family", "conic", "--m", "2"]) == 0
        out = capsys.readouterr().out
        assert "match=true" in out
        _, rows = table(out)
        assert {(r["lambda"], r["dim_gr"]) for r in rows} >= {("0", "4"), ("1", "1")}

    def test_gram_json(self, capsys):
        assert run(["gram", "--family", "conic", "--m", "1", "--json", "--resolution", "16"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["columns"] == ["m", "t", "i", "j", "re", "im"]
        assert len(payload["rows"]) == 9
        assert payload["manifest"]["subcommand"] == "gram"

    def test_volume_dump(self, tmp_path, capsys):
        dump = tmp_path / "grid.csv"
        assert run(["volume", "--family", "cuspidal", "--t-grid", "central,0.5", "--resolution", "16",
                    "--dump-grid", str(dump)]) == 0
        _, rows = table(capsys.readouterr().out)
        assert sum(float(r["weighted_volume"]) for r in rows if r["t"] == "central") == pytest.approx(3)
        assert dump.read_text().startswith("t,component,chart")

    def test_pairing_report(self, capsys):
        assert run(["pairing", "--family", "conic", "--m", "4", "--resolution", "32", "--tolerance-report"]) == 0
        _, rows = table(capsys.readouterr().out)
        assert abs(float(rows[0]["total_mass"])) < 1e-4

    def test_determinism(self, tmp_path, monkeypatch):
        outs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("THREADS", threads)
            path = tmp_path / f"phi{threads}.csv"
            assert run(["phi", "--family", "cuspidal", "--m", "1,2", "--t", "central,0.5",
                        "--resolution", "16", "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
        assert b"# manifest:" in outs[0] and b"family_sha256" in outs[0]

    def test_exit_codes(self, capsys):
        assert run(["bogus"]) == 4
        assert run(["h0", "--family", "nope"]) == 4
        assert run(["h0", "--family", "conic", "--t-grid", "log:1..1e-2:3"]) == 4
        assert run(["rho", "--family", "conic", "--m", "1", "--point", "1,0,1", "--t-grid", "0.1"]) == 2
        assert run(["rho", "--family", "conic", "--m", "1", "--t-grid", "central"]) == 4
        err = capsys.readouterr().err
        assert "PointOffFiber" in err and "GridSpecError" in err

    def test_numeric_exit_code(self, capsys):
        assert run(["continuity", "--family", "conic", "--m", "1", "--point", "1,0,1", "--t-grid", "5"]) == 3
        assert "TrackingFailed" in capsys.readouterr().err

    def test_family_file(self, tmp_path, capsys):
        path = tmp_path / "fam.json"
        path.write_text(json.dumps({"F0": "X*Z", "F1": "-Y^2", "components": [["X", 1], ["Z", 1]]}))
        assert run(["h0", "--family", str(path), "--m", "3"]) == 0
        _, rows = table(capsys.readouterr().out)
        assert rows[0]["h0"] == "7"
