import json

import pytest

from netkat_learn.cli import main


@pytest.fixture
def space(tmp_path):
    p = tmp_path / "two.space"
    p.write_text("field sw 1..2\nfield pt 1..3\n")
    return str(p)


def test_eval(space, capsys):
    assert main(["eval", space, "sw=1;dup;sw:=2", "sw=1,pt=1;sw=1,pt=1;sw=2,pt=1"]) == 0
    assert capsys.readouterr().out.strip() == "member"
    assert main(["eval", space, "sw=2", "sw=1,pt=1;sw=1,pt=1"]) == 0
    assert capsys.readouterr().out.strip() == "not member"


def test_usage_errors(space, capsys):
    assert main(["eval", space, "sw=9", "sw=1,pt=1;sw=1,pt=1"]) == 2
    assert main(["eval", "/nonexistent", "skip", "sw=1,pt=1;sw=1,pt=1"]) == 2
    assert main(["learn-snka", space]) == 2
    assert "error" in capsys.readouterr().err


def test_learn_spp(tmp_path, capsys):
    p = tmp_path / "f.space"
    p.write_text("field f 3\n")
    assert main(["learn-spp", str(p), "f=1"]) == 0
    out = capsys.readouterr().out
    assert out.count("counterexample") == 3
    assert "equivalence queries: 4" in out


def test_learn_snka(space, capsys):
    expr = ("sw=1;pt=1;((pt=1;pt:=2 + pt=2;pt:=1);(pt=1 + pt=3 + pt=2;(sw=1;sw:=2 + sw=2;sw:=1));dup)*;"
            "sw=2;pt=1")
    assert main(["learn-snka", space, "--expr-staged", expr, "--trace"]) == 0
    out = capsys.readouterr().out
    assert "snka states=2" in out and "tables=" in out


def test_learn_pnka(tmp_path, capsys):
    p = tmp_path / "f.space"
    p.write_text("field f 2\n")
    assert main(["learn-pnka", str(p), "--d", "f:=1", "--pf", "f=1"]) == 0
    assert "pnka states=" in capsys.readouterr().out


def test_bench(tmp_path, capsys):
    cfg = tmp_path / "b.json"
    cfg.write_text(json.dumps({"suites": [{"kind": "line", "n": [2, 3]}]}))
    assert main(["bench", str(cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("name,kind,n") and len(out) == 3
    assert main(["bench", str(cfg), "--timeout", "0", "--out", str(tmp_path / "o.csv")]) == 1
