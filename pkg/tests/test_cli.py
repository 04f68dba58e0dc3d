import json
import re

import pytest

from gtlog.cli import main, synthetic_taxonomy

from conftest import CORPUS_DIR, GOLDEN_DIR


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def moves_csv(tmp_path):
    return write(tmp_path, "moves.csv", "a,b\nb,c\n")


def test_run_writes_requested_relations(tmp_path, moves_csv, capsys):
    rc = main(["run", str(CORPUS_DIR / "win_move.gtl"),
               "--rel", f"Move={moves_csv}",
               "--out", "Won,Lost,Drawn", "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "Won.csv").read_text() == "b\n"
    assert (tmp_path / "Lost.csv").read_text() == "c\n"
    assert (tmp_path / "Drawn.csv").read_text() == "a\n"


def test_run_prints_derived_relations(tmp_path, capsys):
    edges = write(tmp_path, "e.csv", "1,2\n2,3\n")
    rc = main(["run", str(CORPUS_DIR / "two_hop.gtl"), "--rel", f"E={edges}"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "# relation E2" in out
    assert "1,3" in out


def test_run_json_output(tmp_path):
    edges = write(tmp_path, "e.csv", "1,2\n")
    rc = main(["run", str(CORPUS_DIR / "two_hop.gtl"), "--rel", f"E={edges}",
               "--out", "E2", "--out-dir", str(tmp_path), "--format", "json"])
    assert rc == 0
    doc = json.loads((tmp_path / "E2.json").read_text())
    assert doc["rows"] == [[1, 2]]


def test_bad_syntax_exits_1(tmp_path, capsys):
    prog = write(tmp_path, "bad.gtl", "E2(x :- E(x);")
    rc = main(["run", prog])
    err = capsys.readouterr().err
    assert rc == 1
    assert re.search(r"line \d+, column \d+", err)


def test_unknown_relation_exits_1(tmp_path, capsys):
    prog = write(tmp_path, "p.gtl", "P(x) :- Mystery(x);")
    assert main(["run", prog]) == 1


def test_runtime_error_exits_2(tmp_path, capsys):
    prog = write(tmp_path, "p.gtl", 'P(x) :- E(x, y), x < "a";')
    edges = write(tmp_path, "e.csv", "1,2\n")
    assert main(["run", prog, "--rel", f"E={edges}"]) == 2


def test_depth_flag_truncates_distance_iteration(tmp_path, capsys):
    prog = write(tmp_path, "dist.gtl",
                 "Start() = 0;\nD(Start()) Min= 0;\nD(y) Min= D(x) + 1 :- E(x, y);")
    edges = write(tmp_path, "path.csv",
                  "".join(f"{i},{i+1}\n" for i in range(19)))
    trace_lines = []
    rc = main(["run", prog, "--rel", f"E={edges}", "--depth", "8", "--trace",
               "--out", "D", "--out-dir", str(tmp_path)])
    assert rc == 0
    err = capsys.readouterr().err
    iters = [int(m.group(1)) for m in re.finditer(r"iter=(\d+) pred=D", err)]
    assert max(iters) == 8
    rows = (tmp_path / "D.csv").read_text().splitlines()
    assert len(rows) == 8  # truncated frontier: nodes 0..7


def test_explain_goldens(capsys):
    for name in ("two_hop", "win_move", "transitive_reduction"):
        rc = main(["explain", str(CORPUS_DIR / f"{name}.gtl")])
        assert rc == 0
        out = capsys.readouterr().out
        assert out == (GOLDEN_DIR / f"explain_{name}.txt").read_text()


def test_render_dot_golden(tmp_path):
    edges = write(tmp_path, "e.csv",
                  "1,2\n2,3\n3,4\n1,3\n2,4\n1,4\n")
    out = tmp_path / "tr.dot"
    rc = main(["render", "src/gtlog/programs/tr_render.gtl",
               "--rel", f"E={edges}", "--pred", "R", "--format", "dot",
               "-o", str(out)])
    assert rc == 0
    assert out.read_text() == (GOLDEN_DIR / "tr_figure.dot").read_text()


def test_render_json_golden(tmp_path):
    edges = write(tmp_path, "e.csv", "1,2\n2,1\n2,3\n3,4\n4,3\n")
    nodes = write(tmp_path, "n.csv", "1\n2\n3\n4\n")
    out = tmp_path / "cond.json"
    rc = main(["render", "src/gtlog/programs/condensation_render.gtl",
               "--rel", f"E={edges}", "--rel", f"Node={nodes}",
               "--pred", "Render", "--format", "json", "-o", str(out)])
    assert rc == 0
    assert out.read_text() == (GOLDEN_DIR / "condensation_figure.json").read_text()


def test_render_absent_predicate_exits_1(tmp_path, capsys):
    edges = write(tmp_path, "e.csv", "1,2\n")
    rc = main(["render", str(CORPUS_DIR / "two_hop.gtl"),
               "--rel", f"E={edges}", "--pred", "Nope"])
    assert rc == 1


def test_bench_small(capsys):
    rc = main(["bench", "--triples", "1000", "--seed", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("bench triples=1000 ")
    fields = dict(kv.split("=") for kv in out.split() if "=" in kv)
    assert fields["termination"] in ("StopPredicate", "Fixpoint")
    assert int(fields["iterations"]) > 0
    assert float(fields["eval_s"]) < 1.0


def test_bench_depth_zero(capsys):
    rc = main(["bench", "--triples", "1000", "--seed", "3", "--depth", "0"])
    assert rc == 0
    fields = dict(kv.split("=") for kv in capsys.readouterr().out.split() if "=" in kv)
    assert fields["edges"] == "0" and fields["termination"] == "DepthCap"


def test_synthetic_taxonomy_shape():
    t_rows, labels, interest = synthetic_taxonomy(5000, 3, 4, 11)
    assert len(t_rows) == 5000
    assert len(interest) == 4
    parent_edges = [t for t in t_rows if t[1] == "P171"]
    assert parent_edges and len(labels) >= len(parent_edges)


def test_env_backstop(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GTLOG_MAX_ITERS", "1")
    prog = write(tmp_path, "dist.gtl",
                 "Start() = 0;\nD(Start()) Min= 0;\nD(y) Min= D(x) + 1 :- E(x, y);")
    edges = write(tmp_path, "path.csv", "0,1\n1,2\n")
    rc = main(["run", prog, "--rel", f"E={edges}", "--trace",
               "--out", "D", "--out-dir", str(tmp_path)])
    assert rc == 0
    assert len((tmp_path / "D.csv").read_text().splitlines()) == 1
