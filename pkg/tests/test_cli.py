import json
import subprocess
import sys

import pytest

from loopquant.cli import main


def run(*args):
    """Run the CLI in a fresh interpreter; return (rc, stdout, stderr)."""
    p = subprocess.run([sys.executable, "-m", "loopquant", *args], capture_output=True, text=True)
    return p.returncode, p.stdout, p.stderr


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["vertex", "--N", "2", "--G", "1", "--D", "5", "--K", "4", "--L", "4",
                 "--out", str(d / "p.json")]) == 0
    el = {"N": 2, "kind": "upper", "matrices": [{"l": 1, "m": [["1", "2"], ["2", "0"]]}]}
    (d / "r.json").write_text(json.dumps(el))
    return d


def test_vertex_entry(tmp_path):
    out = tmp_path / "v.json"
    assert main(["vertex", "--N", "1", "--G", "1", "--D", "4", "--K", "4", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    cubic = [t for t in d["F"][0]["terms"] if t["mono"] == [[1, 0]] * 3]
    assert cubic and cubic[0]["coeff"] == "1/6"


def test_vertex_bad_window():
    assert main(["vertex", "--N", "0", "--G", "1", "--D", "4", "--K", "4"]) == 2


def test_usage_error_is_input_error(capsys):
    assert main(["vertex", "--N", "1"]) == 2
    assert main(["nonsense"]) == 2


def test_deterministic_output(files, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["act", "--potential", str(files / "p.json"), "--element", str(files / "r.json"),
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_act_roundtrip_bytes(files, tmp_path):
    a, b, c = (tmp_path / f"{x}.json" for x in "abc")
    p, r = str(files / "p.json"), str(files / "r.json")
    assert main(["act", "--potential", p, "--element", r, "--out", str(a)]) == 0
    assert main(["act", "--potential", str(a), "--element", r, "--inverse", "--out", str(b)]) == 0
    assert main(["act", "--potential", str(b), "--element", r, "--out", str(c)]) == 0
    assert a.read_bytes() == c.read_bytes()


def test_act_nonsymplectic(files, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N": 2, "kind": "upper", "matrices": [{"l": 1, "m": [["0", "1"], ["-1", "0"]]}]}))
    assert main(["act", "--potential", str(files / "p.json"), "--element", str(bad)]) == 2
    assert "l=1, i=1, j=2" in capsys.readouterr().err


def test_check_ok_and_report(files, tmp_path):
    rep = tmp_path / "rep.json"
    assert main(["check", "--potential", str(files / "p.json"), "--relations", "SE,DE", "TRR",
                 "--report", str(rep)]) == 0
    d = json.loads(rep.read_text())
    assert d["ok"]


def test_check_detects_broken_potential(files, tmp_path):
    d = json.loads((files / "p.json").read_text())
    d["F"][0]["terms"].append({"mono": [[1, 0], [1, 0], [1, 1], [1, 1]], "coeff": "1/5"})
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert main(["check", "--potential", str(bad), "--relations", "TRR"]) == 1


def test_check_missing_file(files):
    assert main(["check", "--potential", str(files / "missing.json"), "--relations", "SE"]) == 2


def test_check_relation_file(files, tmp_path):
    rel = tmp_path / "x.rel"
    rel.write_text("relation X genus 0;\nterm 1 corr(0; ?);\n")
    assert main(["check", "--potential", str(files / "p.json"), "--relations", str(rel)]) == 2


def test_cone(files):
    assert main(["cone", "--potential", str(files / "p.json"), "--jet", "2", "--samples", "1"]) == 0


def test_intersections(tmp_path):
    out = tmp_path / "i.tsv"
    assert main(["intersections", "--G", "1", "--n", "3", "--out", str(out)]) == 0
    assert "1/24" in out.read_text()


def test_element_seeded(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["--seed", "3", "element", "--kind", "lower", "--N", "2", "--out", str(out)]) == 0
    assert a.read_text() == b.read_text()


def test_flowcheck(files):
    assert main(["flowcheck", "--element", str(files / "r.json"), "--N", "2", "--D", "5", "--K", "4", "--L", "4"]) == 0


def test_selfcheck_single_criterion():
    rc, out, _ = run("selfcheck", "--quick", "--only", "1", "6")
    assert rc == 0 and out.count("[PASS]") == 2


def test_selfcheck_corrupted_golden(tmp_path):
    from importlib import resources as res
    text = res.files("loopquant").joinpath("data", "intersections.tsv").read_text()
    broken = text.replace("\t1/24\t", "\t1/25\t", 1)
    assert broken != text
    g = tmp_path / "golden.tsv"
    g.write_text(broken)
    rc, out, _ = run("selfcheck", "--only", "1", "--golden", str(g))
    assert rc == 1
    assert "[FAIL] 1." in out and "diff:" in out and "1/25" in out


def test_module_entry_point():
    rc, out, _ = run("--help")
    assert rc == 0 and "selfcheck" in out
