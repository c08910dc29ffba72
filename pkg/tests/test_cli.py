import json
import math

import pytest

from convexlab import CheckReport
from convexlab.cli import main, read_config
from convexlab.report import ContourSheet, validate_report

W0_FILE = "name = w0-file\nh = t - log(t)\nf = log(t) + 1/t\n"


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.mark.parametrize("energy,expected", [
    ("w0", 2.0),
    ("aubert", -1.0 / 6.0),
    ("adm:1.1", -0.4),
])
def test_eval_identity(capsys, energy, expected):
    rc, out, _ = run(capsys, "eval", "--energy", energy, "--matrix", "1,0,0,1")
    assert rc == 0
    assert float(out) == pytest.approx(expected, rel=1e-12)


def test_eval_json(capsys):
    rc, out, _ = run(capsys, "eval", "--energy", "w0", "--matrix", "1,0,0,1", "--json", "-")
    data = json.loads(out)
    validate_report(data)
    assert rc == 0 and data["kind"] == "eval" and data["margins"]["W"] == 2.0


def test_eval_negative_entries(capsys):
    rc, out, _ = run(capsys, "eval", "--energy", "w0", "--matrix", "-1,0,0,-1")
    assert rc == 0 and float(out) == pytest.approx(2.0)


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "eval", "--energy", "w0", "--matrix", "1,0,0,-1")[0] == 3
    assert run(capsys, "eval", "--energy", "w0", "--matrix", "1,0,0")[0] == 2
    assert run(capsys, "eval", "--energy", "nope", "--matrix", "1,0,0,1")[0] == 3
    assert run(capsys, "eval", "--matrix", "1,0,0,1")[0] == 2
    assert run(capsys, "eval", "--energy-file", str(tmp_path / "missing"), "--matrix", "1,0,0,1")[0] == 2
    assert run(capsys)[0] == 2
    bad = tmp_path / "bad.energy"
    bad.write_text("h = t +\nf = t\n")
    rc, _, err = run(capsys, "eval", "--energy-file", str(bad), "--matrix", "1,0,0,1")
    assert rc == 3 and "position" in err


def test_energy_file(capsys, tmp_path):
    p = tmp_path / "w0.energy"
    p.write_text(W0_FILE)
    rc, out, _ = run(capsys, "eval", "--energy-file", str(p), "--matrix", "2.718281828459045,0,0,1")
    assert rc == 0 and float(out) == pytest.approx(3.0861612696304874, rel=1e-14)


def test_check_rank_one(capsys):
    rc, out, _ = run(capsys, "check", "rank-one", "--energy", "w0", "--method", "both")
    assert rc == 0 and "verdict: pass" in out
    rc, out, _ = run(capsys, "check", "rank-one", "--energy", "adm:1.2")
    assert rc == 1 and "witness" in out
    rc, out, _ = run(capsys, "check", "rank-one", "--energy", "aubert", "--grid", "-1,1,5", "--directions", "12")
    assert rc == 0 and "no violation found at resolution" in out
    assert run(capsys, "check", "rank-one", "--energy", "aubert", "--method", "split")[0] == 3


def test_check_polyconvexity(capsys):
    e = 2.718281828459045
    rc, out, _ = run(capsys, "check", "polyconvexity", "--energy", "w0", "--gamma", f"{e**4},{e**3}", "--nu", f"{e},1",
                     "--json", "-")
    assert rc == 1
    rep = CheckReport.from_json(out)
    assert rep.verdict == "fail"
    assert rep.witnesses[0]["margin"] == pytest.approx(0.0012918854, abs=1e-9)
    rc, out, _ = run(capsys, "check", "polyconvexity", "--energy", "frobenius2", "--gamma-grid", "-1,2,8",
                     "--nu-grid", "-1,2,8")
    assert rc == 0 and "no-violation-found" in out


def test_check_sublevel(capsys):
    rc, out, _ = run(capsys, "check", "sublevel", "--energy", "w0", "--level", "3")
    assert rc == 0 and "verdict: pass" in out
    rc, out, _ = run(capsys, "check", "sublevel", "--energy", "aubert", "--level", "0")
    assert rc == 1
    rc, out, _ = run(capsys, "check", "sublevel", "--energy", "w0", "--level", "4", "--path", "-2,0,0,-1", "1,0,0,1")
    assert rc == 0 and "path: valid" in out
    rc, out, _ = run(capsys, "check", "sublevel", "--energy", "aubert", "--level", "1", "--path", "1,0,0,.5", "2,0,0,1")
    assert rc == 0 and "path: valid" in out
    assert run(capsys, "check", "sublevel", "--energy", "w0", "--level", "2.5", "--path", "9,0,0,1", "1,0,0,1")[0] == 3
    assert run(capsys, "check", "sublevel", "--energy", "w0")[0] == 2


def test_contour_csv_and_svg(capsys, tmp_path):
    rc, out, _ = run(capsys, "contour", "--energy", "w0", "--grid", "-1,1,11", "--levels", "2.5,3,4")
    assert rc == 0
    l1, l2, W = ContourSheet.read_csv(out)
    assert len(W) == 121 and out.splitlines()[0].endswith(",band")
    target = tmp_path / "bands.svg"
    rc, out, _ = run(capsys, "contour", "--energy", "aubert", "--format", "svg", "--grid", "-1,1,11",
                     "--levels", "0", "-o", str(target))
    assert rc == 0 and target.read_text().startswith("<svg")


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("# defaults\nenergy = adm:1.1\nmatrix = 2,0,0,2\n")
    rc, out, _ = run(capsys, "--config", str(cfg), "eval")
    assert rc == 0 and float(out) == pytest.approx(64 * (1 - 1.1))
    rc, out, _ = run(capsys, "--config", str(cfg), "eval", "--energy", "w0")
    assert float(out) == pytest.approx(1.0 + math.log(4.0) + 0.25, rel=1e-14)
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "--config", str(cfg), "eval", "--energy", "w0")[0] == 2
    assert run(capsys, "--config", str(tmp_path / "nope"), "eval")[0] == 2


def test_config_precedence_exact(capsys, tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("energy = aubert\nmatrix = 2,0,0,2\n")
    rc, out, _ = run(capsys, "--config", str(cfg), "eval", "--matrix", "1,0,0,1")
    assert float(out) == pytest.approx(-1.0 / 6.0)


def test_read_config(tmp_path):
    cfg = tmp_path / "c"
    cfg.write_text("level = 3  # comment\n\ngamma-grid = -1,2,5\n")
    assert read_config(str(cfg)) == {"level": "3", "gamma_grid": "-1,2,5"}


def test_reproduce_paper(capsys, tmp_path, monkeypatch):
    out_file = tmp_path / "r.json"
    rc, _, err = run(capsys, "reproduce-paper", "--output", str(out_file))
    assert rc == 0 and err.count("pass ") == 6
    text = out_file.read_text()
    assert CheckReport.from_json(text).to_json() == text
    monkeypatch.setenv("CONVEXLAB_THREADS", "4")
    run(capsys, "reproduce-paper", "--output", str(tmp_path / "r4.json"))
    assert (tmp_path / "r4.json").read_text() == text


def test_reproduce_only_and_errors(capsys, tmp_path):
    rc, out, _ = run(capsys, "reproduce-paper", "--only", "polyconvexity")
    assert rc == 0 and [i["name"] for i in json.loads(out)["items"]] == ["polyconvexity"]
    assert run(capsys, "reproduce-paper", "--only", "nope")[0] == 3
    tampered = tmp_path / "t.energy"
    tampered.write_text("h = t - log(t)\nf = log(t)\n")
    rc, _, err = run(capsys, "reproduce-paper", "--w0", str(tampered))
    assert rc == 1 and "FAIL  w0-sublevels" in err
