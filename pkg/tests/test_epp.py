import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from netkat_learn import epp
from netkat_learn.core import PacketSpace, parse_expr
from netkat_learn.spp import BOT, TOP, Store

F012 = PacketSpace.of(f=(0, 1, 2))


def test_eval_two_field_example():
    e = epp.from_items([((1, 2), (3, 3), False), ((2, 2), (1, 4), True)], 2)
    assert epp.evaluate(e, (1, 2), (3, 3)) is False
    assert epp.evaluate(e, (2, 2), (1, 4)) is True
    assert epp.evaluate(e, (2, 2), (1, 3)) is None
    assert epp.evaluate(e, (0, 0), (0, 0)) is None


def test_update_is_persistent_and_local():
    e0 = epp.empty()
    e1 = epp.update(e0, (1,), (1,), True)
    assert epp.evaluate(e1, (1,), (1,)) is True
    assert epp.evaluate(e0, (1,), (1,)) is None
    assert epp.evaluate(e1, (2,), (2,)) is None
    e2 = epp.update(e1, (2,), (2,), False)
    assert epp.evaluate(e2, (1,), (1,)) is True
    assert epp.update(e2, (2,), (2,), False) == e2


def test_relabel_is_a_contradiction():
    e = epp.update(epp.empty(), (1,), (1,), True)
    with pytest.raises(epp.TeacherContradiction):
        epp.update(e, (1,), (1,), False)


def test_hyp_stages_for_f_eq_1():
    st_ = Store(F012)
    f_ne_0 = st_.compile(parse_expr("f!=0", F012))
    stages = [((1,), (1,), True), ((0,), (0,), False), ((2,), (2,), False)]
    expected = [TOP, f_ne_0, st_.compile(parse_expr("f=1", F012))]
    e = epp.empty()
    assert epp.hyp_spp(st_, e) == BOT
    for (a, b, lab), want in zip(stages, expected):
        e = epp.update(e, a, b, lab)
        assert epp.hyp_spp(st_, e) == want


def test_leaf_cases():
    st_ = Store(PacketSpace((), ()))
    assert epp.hyp_spp(st_, True) == TOP
    assert epp.hyp_spp(st_, False) == BOT


def _consistent(store, e, s):
    return all(store.eval(s, a, b) == lab for a, b, lab in epp.items(e))


def _random_epp(rng, space, n):
    pks = list(space.packets())
    e = epp.empty()
    for _ in range(n):
        a, b = rng.choice(pks), rng.choice(pks)
        if epp.evaluate(e, a, b) is None:
            e = epp.update(e, a, b, rng.random() < 0.5, len(space.fields))
    return e


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_hyp_spp_and_every_candidate_consistent(seed):
    rng = random.Random(seed)
    sp = PacketSpace.of(f=rng.randint(2, 3), g=rng.randint(1, 3))
    store = Store(sp)
    e = _random_epp(rng, sp, rng.randint(1, 12))
    h = epp.hyp_spp(store, e)
    assert _consistent(store, e, h)
    # every candidate at the root agrees with the evidence, and the chosen one is mu-minimal
    inner = {}

    def fill(x):
        if id(x) in inner:
            return
        inner[id(x)] = epp.hyp_spp(store, x)
        if isinstance(x, epp.EppNode):
            for row in x.children.values():
                for sub in row.values():
                    fill(sub)

    fill(e)
    cands = [epp.select(store, e, v, inner) for v in e.keys()]
    for c in cands:
        assert _consistent(store, e, c)
    assert store.mu(h) == min(store.mu(c) for c in cands)


def test_gadget_cases():
    inst = epp.to_epp_hardness(["a", "b"], [])
    a, b = inst.vertex_value["a"], inst.vertex_value["b"]
    p = inst.pair_value[frozenset("ab")]
    assert inst.epp.children[a][p] == epp.gadget(True)
    assert inst.epp.children[b][p] == epp.gadget(True)
    inst = epp.to_epp_hardness(["a", "b"], [("a", "b")])
    assert inst.epp.children[a][p] == epp.gadget(True)
    assert inst.epp.children[b][p] == epp.gadget(False)


def test_hardness_shape():
    inst = epp.to_epp_hardness(range(4), [(0, 1), (1, 2)])
    rows = list(epp.items(inst.epp))
    assert len(rows) == 4 * 3 * 2
    assert all(len(a) == 2 and len(b) == 2 for a, b, _ in rows)
    with pytest.raises(ValueError):
        epp.to_epp_hardness([0, 1], [(0, 0)])


def test_hardness_consistent_on_every_four_vertex_graph():
    pairs = list(itertools.combinations(range(4), 2))
    for mask in range(1 << len(pairs)):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        inst = epp.to_epp_hardness(range(4), edges)
        store = Store(inst.space)
        assert _consistent(store, inst.epp, epp.hyp_spp(store, inst.epp))
