"""Independent brute-force semantics used as test oracles.

Expressions are interpreted directly on concrete packets with a recorded
history, the way the trace semantics is usually stated: a dup appends the
current packet to the history.  Nothing here touches numpy relations or SPPs.
"""
from __future__ import annotations

import itertools
import random
from typing import FrozenSet, Set, Tuple

from netkat_learn.core import (Assign, Drop, Dup, Expr, PacketSpace, Seq, Skip, Star, Test, TestNe,
                               Union)

State = Tuple[tuple, tuple]


def _step(e: Expr, space: PacketSpace, st: State, bound: int) -> Set[State]:
    pk, hist = st
    if isinstance(e, Drop):
        return set()
    if isinstance(e, Skip):
        return {st}
    if isinstance(e, Test):
        return {st} if pk[space.field_index(e.field)] == e.value else set()
    if isinstance(e, TestNe):
        return {st} if pk[space.field_index(e.field)] != e.value else set()
    if isinstance(e, Assign):
        i = space.field_index(e.field)
        return {(pk[:i] + (e.value,) + pk[i + 1:], hist)}
    if isinstance(e, Dup):
        return {(pk, hist + (pk,))} if len(hist) < bound else set()
    if isinstance(e, Union):
        return _step(e.left, space, st, bound) | _step(e.right, space, st, bound)
    if isinstance(e, Seq):
        out = set()
        for mid in _step(e.left, space, st, bound):
            out |= _step(e.right, space, mid, bound)
        return out
    if isinstance(e, Star):
        seen = {st}
        frontier = {st}
        while frontier:
            nxt = set()
            for s in frontier:
                nxt |= _step(e.body, space, s, bound)
            frontier = nxt - seen
            seen |= frontier
        return seen
    raise TypeError(e)


def pairs_of(e: Expr, space: PacketSpace) -> FrozenSet[Tuple[tuple, tuple]]:
    """Input/output pairs of a dup-free expression."""
    out = set()
    for a in space.packets():
        for b, _ in _step(e, space, (a, ()), 0):
            out.add((a, b))
    return frozenset(out)


def traces_of(e: Expr, space: PacketSpace, max_dups: int) -> FrozenSet[tuple]:
    """All guarded strings of ``e`` with at most ``max_dups`` dups."""
    out = set()
    for a in space.packets():
        for b, hist in _step(e, space, (a, ()), max_dups):
            out.add((a,) + hist + (b,))
    return frozenset(out)


# -- brute-force relational algebra -------------------------------------------------

def rel_seq(x, y):
    return frozenset((a, c) for a, b in x for b2, c in y if b == b2)


def rel_star(x, space):
    out = frozenset((a, a) for a in space.packets())
    while True:
        nxt = out | rel_seq(out, x)
        if nxt == out:
            return out
        out = nxt


# -- random expressions -------------------------------------------------------------

def random_space(rng: random.Random, max_fields: int = 3, max_values: int = 3) -> PacketSpace:
    k = rng.randint(1, max_fields)
    names = ["f", "g", "h"][:k]
    return PacketSpace.of(**{n: rng.randint(1, max_values) for n in names})


def random_expr(rng: random.Random, space: PacketSpace, depth: int = 4, dup: bool = False) -> Expr:
    if depth <= 0 or rng.random() < 0.25:
        kind = rng.choice(["test", "test", "ne", "assign", "assign", "skip", "drop"] + (["dup"] if dup else []))
        f = rng.choice(space.fields)
        v = rng.choice(space.domains[space.field_index(f)])
        return {"test": lambda: Test(f, v), "ne": lambda: TestNe(f, v), "assign": lambda: Assign(f, v),
                "skip": Skip, "drop": Drop, "dup": Dup}[kind]()
    op = rng.choice(["union", "seq", "seq", "star"])
    if op == "star":
        return Star(random_expr(rng, space, depth - 1, dup))
    cls = Union if op == "union" else Seq
    return cls(random_expr(rng, space, depth - 1, dup), random_expr(rng, space, depth - 1, dup))


def all_pairs(space: PacketSpace):
    pks = list(space.packets())
    return itertools.product(pks, pks)


def random_pnka(rng, space, k):
    """A random dense PNKA with ``k`` states per packet."""
    import numpy as np
    from netkat_learn.automata import Pnka

    n = space.size
    spell = np.repeat(np.arange(n), k)
    pick = lambda b: b * k + rng.randrange(k)
    start = [pick(a) for a in range(n)]
    delta = [[pick(b) for b in range(n)] for _ in range(n * k)]
    lam = [[rng.random() < 0.4 for _ in range(n)] for _ in range(n * k)]
    return Pnka(space, start, delta, lam, spell)


def random_staged(rng, space, depth=2):
    """A random ``(p_i, d, p_f)`` triple of dup-free expressions; the ends are predicates."""
    from netkat_learn.core import Skip, Test, TestNe, Union

    def pred():
        f = rng.choice(space.fields)
        v = rng.choice(space.domains[space.field_index(f)])
        return rng.choice([Skip(), Test(f, v), TestNe(f, v), Union(Test(f, v), Skip())])

    return pred(), random_expr(rng, space, depth=depth), pred()


TWO_SWITCH = PacketSpace.of(sw=(1, 2), pt=(1, 2, 3))
TWO_SWITCH_EXPR = ("sw=1;pt=1;((pt=1;pt:=2 + pt=2;pt:=1);"
                   "(pt=1 + pt=3 + pt=2;(sw=1;sw:=2 + sw=2;sw:=1));dup)*;sw=2;pt=1")
