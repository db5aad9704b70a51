"""Minimally adequate teachers for SPP and SNKA targets."""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

from .automata import Pnka, Snka, equiv_snka, pnka_to_snka, run_snka
from .core import Dup, Expr, GuardedString, Packet, Seq, Star, has_dup, seq_all
from .spp import BOT, TOP, Store


class SppTeacher:
    """Answers queries about a dup-free target relation."""

    def __init__(self, store: Store, target: int):
        self.store = store
        self.target = target
        self.mem_count = 0
        self.equiv_count = 0

    def mem(self, a: Packet, b: Packet) -> bool:
        self.mem_count += 1
        return self.store.eval(self.target, a, b)

    def equiv(self, h: int) -> Optional[Tuple[Packet, Packet]]:
        """None if ``h`` is the target, else the least pair where they differ."""
        self.equiv_count += 1
        diff = self.store.xor(self.target, h)
        return None if diff == BOT else self.store.choose_pair(diff)


class SnkaTeacher:
    """Answers queries about a trace language given as an SNKA.

    A PNKA target is accepted too; it is embedded as an SNKA once.
    """

    def __init__(self, store: Store, target: Snka | Pnka):
        if isinstance(target, Pnka):
            target = pnka_to_snka(target, store)
        if target.store is not store:
            raise ValueError("target lives in a different store")
        self.store = store
        self.target = target
        self.mem_count = 0
        self.equiv_count = 0

    @property
    def space(self):
        return self.store.space

    def mem(self, w: Sequence[Packet]) -> bool:
        self.mem_count += 1
        return run_snka(self.target, w)

    def equiv(self, h: Snka | Pnka) -> Optional[GuardedString]:
        """None if ``h`` has the target's language, else a witness with fewest dups."""
        self.equiv_count += 1
        if isinstance(h, Pnka):
            h = pnka_to_snka(h, self.store)
        bad = h.audit_determinism()
        if bad is not None:
            raise ValueError(f"hypothesis is not deterministic at state {bad[0]}")
        return equiv_snka(self.target, h)


def _is_predicate(store: Store, s: int) -> bool:
    return store.diff(s, store.intersect(s, TOP)) == BOT


def build_staged_target(store: Store, p_i: Expr | int, d: Expr | int, p_f: Expr | int) -> Snka:
    """Two-state automaton for ``p_i ; (d ; dup)* ; p_f`` with dup-free parts.

    Arguments may be expressions or already compiled SPP ids.
    """
    pi, dd, pf = (x if isinstance(x, int) else store.compile(x) for x in (p_i, d, p_f))
    for name, x in (("p_i", pi), ("p_f", pf)):
        if not _is_predicate(store, x):
            raise ValueError(f"{name} must be a predicate (it modifies packets)")
    eps = (store.seq(pi, pf), pf)
    delta = ({1: store.seq(pi, dd)}, {1: dd})
    return Snka(store, eps, delta)


def _flatten_seq(e: Expr):
    if isinstance(e, Seq):
        return _flatten_seq(e.left) + _flatten_seq(e.right)
    return [e]


def split_staged(e: Expr) -> Tuple[Expr, Expr, Expr]:
    """Read ``p_i ; (d ; dup)* ; p_f`` back into its three dup-free parts."""
    parts = _flatten_seq(e)
    stars = [i for i, x in enumerate(parts) if has_dup(x)]
    if len(stars) != 1 or not isinstance(parts[stars[0]], Star):
        raise ValueError("expected p_i ; (d ; dup)* ; p_f with dup only under the star")
    i = stars[0]
    body = _flatten_seq(parts[i].body)
    if not isinstance(body[-1], Dup) or any(has_dup(x) for x in body[:-1]):
        raise ValueError("the starred body must be d ; dup with d dup-free")
    return seq_all(parts[:i]), seq_all(body[:-1]), seq_all(parts[i + 1:])
