import json
import shutil

import pytest

from ckengine.cli import main
from ckengine.errors import ParseError
from ckengine.script import parse_script, run_script_file, run_script_text


@pytest.fixture()
def work(tmp_path, data_dir):
    for item in data_dir.iterdir():
        if item.is_file():
            shutil.copy(str(item), tmp_path / item.name)
    return tmp_path


def test_relations_script_passes(work):
    rep = run_script_file(work / "o2_relations.ck")
    assert rep.exit_code == 0
    assert rep.summary()["fail"] == 0


def test_flip_hypothesis_script_fails(work):
    rep = run_script_file(work / "flip_hyp.ck")
    assert rep.exit_code == 1
    assert rep.entries[-1]["status"] == "fail"


def test_unknown_verb_is_usage_error(work):
    (work / "bad.ck").write_text("load graph O2 o2.graph\nfrobnicate P(v)\n")
    rep = run_script_file(work / "bad.ck")
    assert rep.exit_code == 2
    (work / "bad2.ck").write_text("load graph O2 o2.graph\neval frob(P(v))\n")
    assert run_script_file(work / "bad2.ck").exit_code == 2


def test_parse_happens_before_execution(work):
    (work / "late.ck").write_text("load graph O2 o2.graph\nreport out.json\neval (\n")
    rep = run_script_file(work / "late.ck")
    assert rep.exit_code == 2
    assert not (work / "out.json").exists()


def test_runtime_usage_errors_exit_2(work):
    (work / "s.ck").write_text("load graph O2 missing.graph\n")
    assert run_script_file(work / "s.ck").exit_code == 2
    (work / "s.ck").write_text("load graph O2 o2.graph\neval S(e3)\n")
    assert run_script_file(work / "s.ck").exit_code == 2
    (work / "s.ck").write_text("eval P(v)\n")
    assert run_script_file(work / "s.ck").exit_code == 2


def test_ex41_script(work):
    rep = run_script_file(work / "ex41.ck")
    assert rep.exit_code == 0, json.dumps(rep.entries, indent=1)


def test_split_script(work):
    assert run_script_file(work / "split.ck").exit_code == 0


def test_failure_carries_normal_forms(work):
    (work / "f.ck").write_text("load graph O2 o2.graph\nassert-equal S(e1), S(e2)\nassert-zero P(v)\n")
    rep = run_script_file(work / "f.ck")
    assert rep.exit_code == 1
    fail = rep.entries[1]["failure"]
    assert fail["lhs"] == [["1", ["e1"], "v"]] and fail["rhs"] == [["1", ["e2"], "v"]]
    assert rep.entries[2]["failure"]["normal_form"] == [["1", "v", "v"]]


def test_report_is_deterministic(work):
    (work / "r.ck").write_text("load graph O2 o2.graph\nverify-laws 2\neval shift(S(e1) * adj(S(e2)))\n")
    a = run_script_file(work / "r.ck", seed=3).as_dict(timing=False)
    b = run_script_file(work / "r.ck", seed=3).as_dict(timing=False)
    assert json.dumps(a) == json.dumps(b)
    assert a["schema"] == "ckengine-report/1" and a["seed"] == 3
    assert set(a["inputs"]) == {"o2.graph", "r.ck"}


def test_report_statement_writes_json(work):
    (work / "w.ck").write_text("load graph O2 o2.graph\nassert zero(P(v) - P(v))\nreport out.json\n")
    assert run_script_file(work / "w.ck").exit_code == 0
    data = json.loads((work / "out.json").read_text())
    assert data["statements"][1]["status"] == "pass"
    assert "timing_ms" in data


def test_continuation_and_comments():
    sts = parse_script("# c\nload graph O2 o2.graph  # trailing\ndefine x = S(e1) \\\n  + S(e2)\n")
    assert [s.kind for s in sts] == ["load-graph", "define"]
    assert sts[1].line == 3


def test_reserved_names_refused():
    with pytest.raises(ParseError):
        parse_script("define adj = 1\n")


def test_float_mode_script(work):
    rep = run_script_file(work / "hadamard.ck", mode="float")
    assert rep.exit_code == 0
    vals = [e["result"] for e in rep.entries if e["kind"] == "eval"]
    assert vals[0] == pytest.approx(0.7071068, abs=1e-6)
    assert vals[1] == pytest.approx(0.0, abs=1e-12)


def test_two_graphs_need_use(work):
    text = ("load graph O2 o2.graph\nload graph E41 ex41.graph\nassert-zero adj(S(e1)) * S(e1) - P(v)\n"
            "use graph E41\nassert-zero adj(S(a)) * S(a) - P(v1)\n")
    assert run_script_text(text, work).exit_code == 0


def test_cli_commands(work, capsys):
    assert main(["run", str(work / "o2_relations.ck"), "--report", str(work / "rep.json")]) == 0
    assert json.loads((work / "rep.json").read_text())["exit_code"] == 0
    assert main(["run", str(work / "flip_hyp.ck")]) == 1
    assert main(["check-graph", str(work / "ex41.graph")]) == 0
    assert main(["hyp", str(work / "ex41.graph"), str(work / "ex41_u.unitary")]) == 0
    out = capsys.readouterr().out
    assert '"oracle_agrees": true' in out
    assert main(["hyp", str(work / "o2.graph"), str(work / "flip.unitary")]) == 1
    assert main(["outsplit", str(work / "split_E.graph"), str(work / "split_E.partition")]) == 0
    assert main(["run", str(work / "hadamard.ck"), "--mode", "float"]) == 0
    assert main(["check-graph", str(work / "nope.graph")]) == 2
    assert main(["frob"]) == 2


def test_check_graph_rejects_bad_graph(work):
    (work / "sink.graph").write_text("vertex x\nvertex y\nedge p : x -> y\nedge q : x -> x\n")
    assert main(["check-graph", str(work / "sink.graph")]) == 1
    (work / "broken.graph").write_text("vertex x\nedge p : x -> y\n")
    assert main(["check-graph", str(work / "broken.graph")]) == 2
