import csv
import io
import json

import pytest

from netkat_learn.automata import enumerate_lang, run_snka
from netkat_learn.bench import (CSV_HEADER, Instance, encode_policy, gen_topology, ingest_edge_list,
                                load_config, run_bench, write_csv)
from netkat_learn.core import parse_expr
from netkat_learn.spp import Store
from netkat_learn.teacher import build_staged_target, split_staged
from oracles import TWO_SWITCH, TWO_SWITCH_EXPR, pairs_of


def test_line_two_is_the_two_switch_network():
    topo = gen_topology("line", 2)
    assert topo.nodes == (1, 2) and topo.nports == 3
    assert topo.port(1, 2) == 2 and topo.port(2, 1) == 2
    enc = encode_policy(topo, "transfer", with_dst=False)
    assert enc.space == TWO_SWITCH
    r_t = parse_expr("(pt=1;pt:=2 + pt=2;pt:=1);(pt=1 + pt=3 + pt=2;(sw=1;sw:=2 + sw=2;sw:=1))")
    assert pairs_of(enc.step, TWO_SWITCH) == pairs_of(r_t, TWO_SWITCH)


def test_full_mode_matches_two_switch_expression():
    enc = encode_policy(gen_topology("line", 2), "transfer", with_dst=False)
    store = Store(enc.space)
    m = build_staged_target(store, parse_expr("sw=1;pt=1"), enc.step, parse_expr("sw=2;pt=1"))
    ref = build_staged_target(store, *split_staged(parse_expr(TWO_SWITCH_EXPR, TWO_SWITCH)))
    assert enumerate_lang(m, 3) == enumerate_lang(ref, 3)


def test_ring_three_reaches_every_destination():
    topo = gen_topology("ring", 3)
    assert len(topo.edges) == 3
    enc = encode_policy(topo, "full")
    store = Store(enc.space)
    step = store.compile(enc.step)
    m = build_staged_target(store, enc.p_i, step, enc.p_f)
    for src in topo.nodes:
        for dst in topo.nodes:
            a = (src, 1, dst)
            w = [a]
            for _ in range(len(topo.nodes) + 1):
                if a[0] == dst:
                    break
                (a,) = store.sp_packets(store.image(store.sp_from_packet(a), step))
                w.append(a)
            w.append(a)
            assert run_snka(m, tuple(w)), (src, dst)


def test_generators():
    assert gen_topology("random", 6, seed=3) == gen_topology("random", 6, seed=3)
    for kind in ("line", "ring", "star", "tree", "random"):
        assert gen_topology(kind, 5, seed=1).is_connected()
    with pytest.raises(ValueError):
        gen_topology("mesh", 4)
    with pytest.raises(ValueError):
        gen_topology("ring", 2)


def test_edge_lists(tmp_path):
    f = tmp_path / "abc.txt"
    f.write_text("a b\nb c\n")
    topo = ingest_edge_list(f)
    assert topo.nodes == (1, 2, 3) and len(topo.edges) == 2
    for bad in ("", "a b\nb a\n", "a a\n", "a b c\n", "a b\nc d\n"):
        f.write_text(bad)
        with pytest.raises(ValueError):
            ingest_edge_list(f)


def test_line_suite_csv():
    res = run_bench([Instance(gen_topology("line", n), "transfer") for n in range(2, 7)], timeout_s=60)
    text = write_csv(res)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 6
    assert all(r[-1] == "1" for r in rows[1:])


def test_zero_timeout_fails_every_row():
    res = run_bench([Instance(gen_topology("line", n), "full") for n in (3, 4)], timeout_s=0)
    assert all(not r.success and r.wall_ms >= 0 for r in res)


def test_config(tmp_path):
    (tmp_path / "g.txt").write_text("x y\ny z\n")
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"suites": [{"kind": "ring", "n": [3, 4], "modes": ["transfer", "full"]}],
                               "edge_lists": ["g.txt"], "timeout_s": 5}))
    c = load_config(cfg)
    assert len(c.instances) == 5 and c.timeout_s == 5
    cfg.write_text(json.dumps({"suites": [{"kind": "ring", "n": 3, "modes": ["both"]}]}))
    with pytest.raises(ValueError):
        load_config(cfg)
