import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netkat_learn.automata import (BudgetExceeded, Pnka, Snka, all_traces, empty_snka, enumerate_lang,
                                   equiv_snka, iso_pnka, minimize_pnka, pnka_to_snka, run_pnka, run_snka)
from netkat_learn.core import PacketSpace, dups, parse_expr
from netkat_learn.spp import BOT, TOP, Store
from netkat_learn.teacher import build_staged_target
from oracles import random_pnka, random_staged

F12 = PacketSpace.of(f=(1, 2))
P, Q = (1,), (2,)


def example_pnka():
    return Pnka.from_packets(F12, {P: 0, Q: 1},
                             {0: {P: 3, Q: 2}, 1: {P: 3, Q: 1}, 2: {P: 0, Q: 1}, 3: {P: 3, Q: 1}},
                             {0: [P], 2: [Q]}, [P, Q, Q, P])


def test_pnka_runs():
    m = example_pnka()
    assert m.nstates == 4
    assert run_pnka(m, (P, P))
    assert not run_pnka(m, (P, Q))
    assert run_pnka(m, (P, Q, Q))
    assert not run_pnka(m, (Q, Q, Q))
    with pytest.raises(ValueError):
        run_pnka(m, (P,))


def test_pnka_language_to_three_dups():
    lang = enumerate_lang(example_pnka(), 3)
    assert lang == {(P, P), (P, Q, Q), (P, Q, P, P), (P, Q, P, Q, Q)}


def test_spelling_is_enforced():
    with pytest.raises(ValueError):
        Pnka.from_packets(F12, {P: 0, Q: 0}, {0: {P: 0, Q: 0}}, {}, [P])


def test_minimize_example_is_already_minimal():
    m = example_pnka()
    mm = minimize_pnka(m)
    assert mm.nstates == 4
    assert iso_pnka(m, mm)


def test_snka_runs_and_empty():
    st_ = Store(F12)
    assert not run_snka(empty_snka(st_), (P, P))
    m = Snka(st_, (BOT, TOP), ({1: TOP}, {1: TOP}))
    assert not run_snka(m, (P, P))
    assert run_snka(m, (P, P, P))
    assert run_snka(m, (Q, Q, Q, Q))
    assert not run_snka(m, (P, Q, Q))
    assert not run_snka(m, (P, P, Q))


def test_budget():
    with pytest.raises(BudgetExceeded):
        list(all_traces(PacketSpace.of(f=10), 5, budget=1000))
    assert len(list(all_traces(F12, 2))) == 4 + 8 + 16


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_minimize_preserves_language_and_is_canonical(seed):
    rng = random.Random(seed)
    sp = PacketSpace.of(f=rng.randint(1, 3))
    m = random_pnka(rng, sp, rng.randint(1, 3))
    mm = minimize_pnka(m)
    assert mm.nstates <= m.nstates
    assert enumerate_lang(m, 3) == enumerate_lang(mm, 3)
    assert iso_pnka(mm, minimize_pnka(mm))
    # reachable states of the minimized form are pairwise distinguishable to depth nstates
    assert len(set(mm.reachable())) == mm.nstates


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_pnka_embedding_preserves_language(seed):
    rng = random.Random(seed)
    sp = PacketSpace.of(f=rng.randint(1, 3))
    m = random_pnka(rng, sp, rng.randint(1, 3))
    s = pnka_to_snka(m, Store(sp))
    assert s.is_deterministic()
    assert enumerate_lang(m, 3) == enumerate_lang(s, 3)


def _random_snka(rng, store):
    sp = store.space
    if rng.random() < 0.5:
        return pnka_to_snka(random_pnka(rng, sp, rng.randint(1, 2)), store)
    return build_staged_target(store, *random_staged(rng, sp))


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_equiv_sound_and_minimal(seed):
    rng = random.Random(seed)
    sp = PacketSpace.of(f=rng.randint(1, 2), g=rng.randint(1, 2))
    store = Store(sp)
    a, b = _random_snka(rng, store), _random_snka(rng, store)
    w = equiv_snka(a, b)
    la, lb = enumerate_lang(a, 3), enumerate_lang(b, 3)
    diff = la ^ lb
    if w is None:
        assert not diff
    else:
        assert run_snka(a, w) != run_snka(b, w)
        if diff:
            assert dups(w) == min(dups(x) for x in diff)
    assert equiv_snka(a, a) is None
