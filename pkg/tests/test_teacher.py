import random

import pytest
from hypothesis import given, settings, strategies as st

from netkat_learn.automata import Snka, all_traces, empty_snka, enumerate_lang, run_snka
from netkat_learn.core import Dup, PacketSpace, Seq, Star, dups, gs_member, parse_expr
from netkat_learn.spp import BOT, TOP, Store
from netkat_learn.teacher import SnkaTeacher, SppTeacher, build_staged_target, split_staged
from oracles import TWO_SWITCH as SP, TWO_SWITCH_EXPR, random_staged

F012 = PacketSpace.of(f=(0, 1, 2))


def test_spp_teacher_examples():
    st_ = Store(F012)
    target = st_.compile(parse_expr("f=1", F012))
    t = SppTeacher(st_, target)
    assert t.mem((1,), (1,)) and not t.mem((0,), (0,))
    assert t.equiv(target) is None
    assert t.equiv(TOP) == ((0,), (0,))
    assert t.equiv(BOT) == ((1,), (1,))
    assert (t.mem_count, t.equiv_count) == (2, 3)
    assert not SppTeacher(st_, BOT).mem((2,), (2,))


def two_switch():
    store = Store(SP)
    return store, build_staged_target(store, *split_staged(parse_expr(TWO_SWITCH_EXPR, SP)))


def test_two_switch_traces():
    _, m = two_switch()
    t = SnkaTeacher(m.store, m)
    assert t.mem(((1, 1), (2, 2), (2, 1), (2, 1)))
    assert not t.mem(((1, 1), (2, 2), (2, 2)))
    assert not SnkaTeacher(m.store, empty_snka(m.store)).mem(((1, 1), (1, 1)))


def test_two_switch_matches_expression():
    _, m = two_switch()
    e = parse_expr(TWO_SWITCH_EXPR, SP)
    for w in all_traces(SP, 3):
        assert run_snka(m, w) == gs_member(e, w, SP), w
    assert enumerate_lang(m, 3) == {((1, 1), (2, 2), (2, 1), (2, 1))}


def test_first_counterexample_against_empty():
    store, m = two_switch()
    w = SnkaTeacher(store, m).equiv(empty_snka(store))
    assert w is not None and dups(w) == 2
    assert gs_member(parse_expr(TWO_SWITCH_EXPR, SP), w, SP)


def test_single_trace_hypothesis():
    store = Store(F012)
    w = ((1,), (2,), (0,))
    a, b, c = w
    h = Snka(store, (BOT, store.from_pair(b, c)), ({1: store.from_pair(a, b)}, {}))
    assert enumerate_lang(h, 3) == {w}
    assert SnkaTeacher(store, empty_snka(store)).equiv(h) == w


def test_degenerate_staged_targets():
    store = Store(F012)
    m = build_staged_target(store, parse_expr("skip"), parse_expr("drop"), parse_expr("skip"))
    assert enumerate_lang(m, 2) == {(p, p) for p in F012.packets()}
    m = build_staged_target(store, parse_expr("drop"), parse_expr("f:=1"), parse_expr("skip"))
    assert enumerate_lang(m, 2) == set()
    with pytest.raises(ValueError):
        build_staged_target(store, parse_expr("f:=1"), parse_expr("skip"), parse_expr("skip"))


def test_split_staged_rejects_other_shapes():
    with pytest.raises(ValueError):
        split_staged(parse_expr("f=1;dup"))
    with pytest.raises(ValueError):
        split_staged(parse_expr("(dup;f:=1)*"))


def test_teacher_rejects_nondeterministic_hypothesis():
    store = Store(F012)
    h = Snka(store, (BOT, BOT, BOT), ({1: TOP, 2: TOP}, {}, {}))
    with pytest.raises(ValueError):
        SnkaTeacher(store, empty_snka(store)).equiv(h)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_staged_target_matches_expression(seed):
    rng = random.Random(seed)
    sp = PacketSpace.of(f=rng.randint(1, 3)) if seed % 2 else PacketSpace.of(f=2, g=rng.randint(1, 2))
    store = Store(sp)
    p_i, d, p_f = random_staged(rng, sp)
    m = build_staged_target(store, p_i, d, p_f)
    e = Seq(p_i, Seq(Star(Seq(d, Dup())), p_f))
    for w in all_traces(sp, 2):
        assert run_snka(m, w) == gs_member(e, w, sp)


def test_teacher_is_deterministic():
    runs = []
    for _ in range(2):
        store, m = two_switch()
        t = SnkaTeacher(store, m)
        runs.append([t.equiv(empty_snka(store)), t.equiv(build_staged_target(store, parse_expr("skip"),
                                                                             parse_expr("pt:=1"),
                                                                             parse_expr("skip")))])
    assert runs[0] == runs[1]
