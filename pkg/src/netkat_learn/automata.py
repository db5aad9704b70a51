"""Packet-state (PNKA) and symbolic (SNKA) NetKAT automata.

A trace is a tuple of packets with an implicit dup between neighbours.  A PNKA
reads it one packet at a time: the first packet picks a start state, each
interior packet moves along ``delta`` and the last one is looked up in ``lam``.
An SNKA reads overlapping pairs: every pair except the last must be accepted by
some outgoing transition SPP, the last by the observation SPP of the state
reached.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .core import GuardedString, Packet, PacketSpace
from .epp import Epp, empty as empty_epp, items as epp_items
from .spp import BOT, SP_EMPTY, SP_FULL, Store


class BudgetExceeded(RuntimeError):
    pass


# -- PNKA ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Pnka:
    """Dense-table PNKA; packets are addressed by their index in ``space``.

    ``start[a]`` is the state after reading packet ``a``; ``delta[q, b]`` and
    ``lam[q, b]`` are the successor and the verdict when ``b`` is read in
    ``q``; ``spell[q]`` is the packet index every edge into ``q`` carries.
    """
    space: PacketSpace
    start: np.ndarray
    delta: np.ndarray
    lam: np.ndarray
    spell: np.ndarray

    def __post_init__(self):
        n, k = self.space.size, len(self.spell)
        object.__setattr__(self, "start", np.asarray(self.start, dtype=np.int64))
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=np.int64).reshape(k, n))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=bool).reshape(k, n))
        object.__setattr__(self, "spell", np.asarray(self.spell, dtype=np.int64))
        if self.start.shape != (n,):
            raise ValueError("start map must cover every packet")
        if k and (self.delta.min() < 0 or self.delta.max() >= k or self.start.max() >= k):
            raise ValueError("transition target out of range")
        if not (self.spell[self.start] == np.arange(n)).all():
            raise ValueError("start state does not spell its packet")
        if not (self.spell[self.delta] == np.arange(n)[None, :]).all():
            raise ValueError("transition target does not spell its packet")

    @property
    def nstates(self) -> int:
        return len(self.spell)

    @classmethod
    def from_packets(cls, space: PacketSpace, start: Mapping[Packet, int],
                     delta: Mapping[int, Mapping[Packet, int]], accept: Mapping[int, Sequence[Packet]],
                     spell: Sequence[Packet]) -> "Pnka":
        """Build from packet-keyed maps; ``accept[q]`` lists the packets with ``lam = 1``."""
        n = space.size
        k = len(spell)
        st = np.zeros(n, dtype=np.int64)
        for pk, q in start.items():
            st[space.index_of(pk)] = q
        dl = np.zeros((k, n), dtype=np.int64)
        lm = np.zeros((k, n), dtype=bool)
        for q in range(k):
            for pk, q2 in delta[q].items():
                dl[q, space.index_of(pk)] = q2
            for pk in accept.get(q, ()):
                lm[q, space.index_of(pk)] = True
        return cls(space, st, dl, lm, np.array([space.index_of(p) for p in spell], dtype=np.int64))

    def reachable(self) -> List[int]:
        """Reachable states in BFS order from the start map."""
        seen: Dict[int, None] = {}
        queue = deque()
        for q in self.start:
            if int(q) not in seen:
                seen[int(q)] = None
                queue.append(int(q))
        while queue:
            q = queue.popleft()
            for q2 in self.delta[q]:
                if int(q2) not in seen:
                    seen[int(q2)] = None
                    queue.append(int(q2))
        return list(seen)

    def dump(self) -> str:
        sp = self.space
        fmt = lambda i: sp.format_packet(sp.packet_at(int(i)))
        lines = [f"pnka states={self.nstates}"]
        lines.append("start " + " ".join(f"[{fmt(a)}]->q{int(q)}" for a, q in enumerate(self.start)))
        for q in range(self.nstates):
            acc = ",".join(f"[{fmt(b)}]" for b in np.flatnonzero(self.lam[q]))
            edges = " ".join(f"[{fmt(b)}]->q{int(q2)}" for b, q2 in enumerate(self.delta[q]))
            lines.append(f"q{q} spell [{fmt(self.spell[q])}] accept {{{acc}}} delta {edges}")
        return "\n".join(lines)


def run_pnka(m: Pnka, w: Sequence[Packet]) -> bool:
    if len(w) < 2:
        raise ValueError("a trace has at least two packets")
    idx = m.space.index_of
    q = int(m.start[idx(w[0])])
    for pk in w[1:-1]:
        q = int(m.delta[q, idx(pk)])
    return bool(m.lam[q, idx(w[-1])])


def minimize_pnka(m: Pnka) -> Pnka:
    """Moore refinement over reachable states; blocks are numbered in BFS order."""
    reach = m.reachable()
    pos = {q: i for i, q in enumerate(reach)}
    block = {}
    keys: Dict[tuple, int] = {}
    for q in reach:
        block[q] = keys.setdefault((int(m.spell[q]), m.lam[q].tobytes()), len(keys))
    while True:
        keys = {}
        nxt = {}
        for q in reach:
            sig = (block[q], tuple(block[int(q2)] for q2 in m.delta[q]))
            nxt[q] = keys.setdefault(sig, len(keys))
        stable = len(keys) == len(set(block.values()))
        block = nxt
        if stable:
            break
    rep: Dict[int, int] = {}
    for q in reach:
        rep.setdefault(block[q], q)
    # renumber by BFS order of the quotient
    order: Dict[int, int] = {}
    queue = deque()
    for q in m.start:
        b = block[int(q)]
        if b not in order:
            order[b] = len(order)
            queue.append(b)
    while queue:
        b = queue.popleft()
        for q2 in m.delta[rep[b]]:
            b2 = block[int(q2)]
            if b2 not in order:
                order[b2] = len(order)
                queue.append(b2)
    k = len(order)
    inv = sorted(order, key=order.get)
    start = np.array([order[block[int(q)]] for q in m.start])
    delta = np.array([[order[block[int(q2)]] for q2 in m.delta[rep[b]]] for b in inv]).reshape(k, -1)
    lam = np.array([m.lam[rep[b]] for b in inv]).reshape(k, -1)
    spell = np.array([m.spell[rep[b]] for b in inv])
    del pos
    return Pnka(m.space, start, delta, lam, spell)


def iso_pnka(a: Pnka, b: Pnka) -> bool:
    """Whether the reachable parts are isomorphic (the candidate map is forced)."""
    if a.space != b.space:
        return False
    fwd: Dict[int, int] = {}
    bwd: Dict[int, int] = {}
    queue = deque()

    def pair(p: int, q: int) -> bool:
        if p in fwd or q in bwd:
            return fwd.get(p) == q and bwd.get(q) == p
        if a.spell[p] != b.spell[q] or not np.array_equal(a.lam[p], b.lam[q]):
            return False
        fwd[p], bwd[q] = q, p
        queue.append(p)
        return True

    for p, q in zip(a.start, b.start):
        if not pair(int(p), int(q)):
            return False
    while queue:
        p = queue.popleft()
        q = fwd[p]
        for p2, q2 in zip(a.delta[p], b.delta[q]):
            if not pair(int(p2), int(q2)):
                return False
    return True


# -- SNKA ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Snka:
    """Symbolic automaton; state 0 is the start.  SPP ids live in ``store``."""
    store: Store
    eps: Tuple[int, ...]
    delta: Tuple[Mapping[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(self.eps))
        object.__setattr__(self, "delta", tuple({t: s for t, s in d.items() if s != BOT} for d in self.delta))
        if len(self.eps) != len(self.delta) or not self.eps:
            raise ValueError("need one observation and one transition map per state")
        for d in self.delta:
            if any(not 0 <= t < len(self.eps) for t in d):
                raise ValueError("transition target out of range")

    @property
    def nstates(self) -> int:
        return len(self.eps)

    @property
    def space(self) -> PacketSpace:
        return self.store.space

    def audit_determinism(self) -> Optional[Tuple[int, int, int]]:
        """First ``(s, t1, t2)`` whose transition SPPs overlap, or None."""
        st = self.store
        for s, d in enumerate(self.delta):
            for (t1, x1), (t2, x2) in itertools.combinations(sorted(d.items()), 2):
                if st.intersect(x1, x2) != BOT:
                    return s, t1, t2
        return None

    def is_deterministic(self) -> bool:
        return self.audit_determinism() is None

    def dump(self) -> str:
        st = self.store
        lines = [f"snka states={self.nstates} start=s0"]
        for s in range(self.nstates):
            lines.append(f"s{s} eps {st.mu(self.eps[s])}")
            lines.extend("  " + ln for ln in st.dump(self.eps[s]).splitlines())
            for t, x in sorted(self.delta[s].items()):
                lines.append(f"s{s} -> s{t}")
                lines.extend("  " + ln for ln in st.dump(x).splitlines())
        return "\n".join(lines)


def empty_snka(store: Store) -> Snka:
    """The one-state automaton of the empty language."""
    return Snka(store, (BOT,), ({},))


def run_snka(m: Snka, w: Sequence[Packet]) -> bool:
    if len(w) < 2:
        raise ValueError("a trace has at least two packets")
    st = m.store
    s = 0
    for a, b in zip(w[:-2], w[1:-1]):
        for t, x in m.delta[s].items():
            if st.eval(x, a, b):
                s = t
                break
        else:
            return False
    return st.eval(m.eps[s], w[-2], w[-1])


def pnka_to_snka(m: Pnka, store: Store) -> Snka:
    """Embed a PNKA: a fresh start state plus one SNKA state per PNKA state."""
    if store.space != m.space:
        raise ValueError("store over a different packet space")
    sp = m.space
    pk = [sp.packet_at(i) for i in range(sp.size)]
    k = m.nstates
    eps: List[int] = [BOT] * (k + 1)
    delta: List[Dict[int, int]] = [dict() for _ in range(k + 1)]
    start_pairs: Dict[int, list] = {}
    acc0 = []
    for a in range(sp.size):
        q = int(m.start[a])
        for b in range(sp.size):
            if m.lam[q, b]:
                acc0.append((pk[a], pk[b]))
            start_pairs.setdefault(int(m.delta[q, b]), []).append((pk[a], pk[b]))
    eps[0] = store.from_pairs(acc0)
    delta[0] = {q2 + 1: store.from_pairs(ps) for q2, ps in start_pairs.items()}
    for q in range(k):
        a = pk[int(m.spell[q])]
        eps[q + 1] = store.from_pairs((a, pk[b]) for b in np.flatnonzero(m.lam[q]))
        per: Dict[int, list] = {}
        for b in range(sp.size):
            per.setdefault(int(m.delta[q, b]), []).append((a, pk[b]))
        delta[q + 1] = {q2 + 1: store.from_pairs(ps) for q2, ps in per.items()}
    return Snka(store, eps, delta)


# -- evidence automata -----------------------------------------------------------

@dataclass
class EvidenceAutomaton:
    """Transitions and observations labelled by EPPs; state 0 is the start."""
    nstates: int
    eps: List[Epp] = field(default_factory=list)
    delta: List[Dict[int, Epp]] = field(default_factory=list)

    def __post_init__(self):
        if not self.eps:
            self.eps = [empty_epp() for _ in range(self.nstates)]
        if not self.delta:
            self.delta = [dict() for _ in range(self.nstates)]

    def dump(self, space: PacketSpace) -> str:
        fmt = space.format_packet
        lines = [f"ea states={self.nstates}"]
        for q in range(self.nstates):
            for a, b, lab in epp_items(self.eps[q]):
                lines.append(f"q{q} eps [{fmt(a)}]->[{fmt(b)}] {int(lab)}")
            for t in sorted(self.delta[q]):
                for a, b, lab in epp_items(self.delta[q][t]):
                    lines.append(f"q{q} -> q{t} [{fmt(a)}]->[{fmt(b)}] {int(lab)}")
        return "\n".join(lines)


# -- bounded languages -----------------------------------------------------------

def all_traces(space: PacketSpace, max_dups: int, budget: int = 2_000_000) -> Iterator[GuardedString]:
    """Every trace over ``space`` with at most ``max_dups`` dups, shortest first."""
    n = space.size
    total = sum(n ** (k + 2) for k in range(max_dups + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} traces exceed budget {budget}")
    pks = list(space.packets())
    for k in range(max_dups + 1):
        yield from itertools.product(pks, repeat=k + 2)


def enumerate_lang(m, max_dups: int, budget: int = 2_000_000) -> Set[GuardedString]:
    """Accepted traces with at most ``max_dups`` dups (brute force)."""
    run = run_pnka if isinstance(m, Pnka) else run_snka
    return {w for w in all_traces(m.space, max_dups, budget) if run(m, w)}


# -- symbolic equivalence ----------------------------------------------------------

DEAD = -1


def equiv_snka(target: Snka, hyp: Snka) -> Optional[GuardedString]:
    """A trace with the fewest dups on which the two automata disagree, or None.

    Breadth-first over product states, one layer per dup.  Each product state
    carries the set of packets it can be entered with that were not seen there
    in an earlier layer.  A side with no matching transition moves to its dead
    state, which accepts nothing and follows the live side.
    """
    st = target.store
    if hyp.store is not st:
        raise ValueError("automata must share an SPP store")

    def eps(side: Snka, s: int) -> int:
        return BOT if s == DEAD else side.eps[s]

    seen: Dict[Tuple[int, int], int] = {(0, 0): SP_FULL}
    layers: List[Dict[Tuple[int, int], int]] = [{(0, 0): SP_FULL}]
    parents: List[Dict[Tuple[int, int], List[Tuple[Tuple[int, int], int]]]] = [{}]
    while True:
        layer = layers[-1]
        for p in sorted(layer):
            reach = layer[p]
            bad = st.seq(st.id_of(reach), st.xor(eps(target, p[0]), eps(hyp, p[1])))
            if bad != BOT:
                a, b = st.choose_pair(bad)
                return _backtrack(st, layers, parents, p, a) + (b,)
        nxt: Dict[Tuple[int, int], int] = {}
        nparents: Dict[Tuple[int, int], List[Tuple[Tuple[int, int], int]]] = {}
        for p in sorted(layer):
            reach = layer[p]
            for q, x in _successors(st, target, hyp, p):
                img = st.sp_diff(st.image(reach, x), seen.get(q, SP_EMPTY))
                if img == SP_EMPTY:
                    continue
                nxt[q] = st.sp_union(nxt.get(q, SP_EMPTY), img)
                nparents.setdefault(q, []).append((p, x))
        if not nxt:
            return None
        for q, r in nxt.items():
            seen[q] = st.sp_union(seen.get(q, SP_EMPTY), r)
        layers.append(nxt)
        parents.append(nparents)


def _successors(st: Store, target: Snka, hyp: Snka, p: Tuple[int, int]):
    sT, sH = p
    dT = target.delta[sT] if sT != DEAD else {}
    dH = hyp.delta[sH] if sH != DEAD else {}
    if sT == DEAD:
        for tH, xH in sorted(dH.items()):
            yield (DEAD, tH), xH
        return
    if sH == DEAD:
        for tT, xT in sorted(dT.items()):
            yield (tT, DEAD), xT
        return
    for tT, xT in sorted(dT.items()):
        for tH, xH in sorted(dH.items()):
            x = st.intersect(xT, xH)
            if x != BOT:
                yield (tT, tH), x
    allT = st.union_all(dT.values())
    allH = st.union_all(dH.values())
    for tT, xT in sorted(dT.items()):
        x = st.diff(xT, allH)
        if x != BOT:
            yield (tT, DEAD), x
    for tH, xH in sorted(dH.items()):
        x = st.diff(xH, allT)
        if x != BOT:
            yield (DEAD, tH), x


def _backtrack(st: Store, layers, parents, p, a: Packet) -> Tuple[Packet, ...]:
    trace = [a]
    for depth in range(len(layers) - 1, 0, -1):
        target_sp = st.sp_from_packet(trace[-1])
        for prev, x in parents[depth][p]:
            cand = st.sp_intersect(st.preimage(target_sp, x), layers[depth - 1][prev])
            if cand != SP_EMPTY:
                trace.append(st.sp_choose(cand))
                p = prev
                break
        else:  # pragma: no cover - the frontier was built from these edges
            raise AssertionError("broken parent chain")
    return tuple(reversed(trace))
