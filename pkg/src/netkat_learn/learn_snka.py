"""The symbolic learner: partial tables, evidence automata, SPP generalisation.

Tables exist only for packets that occur in counterexamples, and only the
cells ``S_pi x E_pi`` are ever queried.  A conjecture is built in two steps:
rows of all tables are merged into global states and their observed packet
pairs recorded as EPP evidence; each EPP is then generalised to an SPP and
outgoing transitions are made disjoint by subtraction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from . import epp
from .automata import EvidenceAutomaton, Snka, empty_snka, run_snka
from .core import Packet, PacketSpace, shortlex_key
from .learn_pnka import Oracle, PacketTable, Word
from .spp import BOT, Store
from .teacher import SnkaTeacher


class PartialTable:
    def __init__(self, space: PacketSpace, oracle: Oracle):
        self.space = space
        self.oracle = oracle
        self.tables: Dict[Packet, PacketTable] = {}
        self._key = lambda w: shortlex_key(space, w)

    def packets(self) -> List[Packet]:
        return sorted(self.tables)

    def extend(self) -> int:
        filled = 0
        for t in self.tables.values():
            for s in t.S:
                for e in t.E:
                    if (s, e) not in t.T:
                        t.T[s, e] = self.oracle(s + e)
                        filled += 1
        return filled

    def update(self, c: Word) -> None:
        for i in range(1, len(c)):
            s, e = c[:i], c[i:]
            t = self.tables.setdefault(s[-1], PacketTable())
            t.add_prefix(s)
            t.add_suffix(e)
        self.extend()

    def children(self) -> Dict[Word, List[Packet]]:
        """For each prefix, the packets ``b`` with ``s + (b,)`` also a prefix, in order."""
        out: Dict[Word, List[Packet]] = {}
        for b, t in self.tables.items():
            for x in t.S:
                if len(x) > 1:
                    out.setdefault(x[:-1], []).append(b)
        for v in out.values():
            v.sort()
        return out

    def inconsistency(self) -> Optional[Tuple[Packet, Word]]:
        """A table and suffix repairing the first violation, or None.

        Two prefixes with equal rows only conflict through an extension
        ``beta`` when both extended prefixes are in the ``beta`` table.
        """
        kids = self.children()
        for p in self.packets():
            t = self.tables[p]
            first: Dict[tuple, Word] = {}
            for s in sorted(t.S, key=self._key):
                r = t.row(s)
                for b in kids.get(s, ()):
                    tb = self.tables[b]
                    x = s + (b,)
                    y = first.setdefault((r, b), x)
                    for e in tb.E:
                        if tb.T[x, e] != tb.T[y, e]:
                            return p, (b,) + e
        return None

    def make_consistent(self) -> int:
        added = 0
        while True:
            got = self.inconsistency()
            if got is None:
                return added
            p, e = got
            self.tables[p].add_suffix(e)
            self.extend()
            added += 1

    def rows(self, p: Packet) -> List[Tuple[bool, ...]]:
        """Distinct rows of one table, by shortlex-least access prefix."""
        t = self.tables[p]
        seen: Dict[Tuple[bool, ...], None] = {}
        for s in sorted(t.S, key=self._key):
            seen.setdefault(t.row(s), None)
        return list(seen)

    def glob(self) -> Dict[Packet, Dict[Tuple[bool, ...], int]]:
        """Global state of each row, using as many states as the largest table has rows.

        The bare packet's row is pinned to state 0 and the other rows take
        states 1, 2, ... in order.  A table without its bare packet only falls
        back on state 0 once the others are used up.
        """
        rows = {p: self.rows(p) for p in self.packets()}
        n = max((len(r) for r in rows.values()), default=1)
        out = {}
        for p, rs in rows.items():
            t = self.tables[p]
            if t.has_prefix((p,)):
                bare = t.row((p,))
                rs.remove(bare)
                out[p] = {bare: 0, **{r: i for i, r in enumerate(rs, 1)}}
            else:
                slots = list(range(1, n)) + [0]
                out[p] = {r: slots[i] for i, r in enumerate(rs)}
        return out

    def size(self) -> Tuple[int, int, int]:
        """(distinct rows, prefixes, suffixes) summed over tables."""
        rows = sum(len(self.rows(p)) for p in self.tables)
        return rows, sum(len(t.S) for t in self.tables.values()), sum(len(t.E) for t in self.tables.values())

    def dump(self) -> str:
        fmt = lambda w: " ".join(f"[{self.space.format_packet(x)}]" for x in w)
        lines = []
        for p in self.packets():
            t = self.tables[p]
            lines.append(f"table [{self.space.format_packet(p)}] S={len(t.S)} E={len(t.E)} rows={len(self.rows(p))}")
            for s in sorted(t.S, key=self._key):
                bits = "".join("1" if b else "0" for b in t.row(s))
                lines.append(f"  {fmt(s)} : {bits}")
        return "\n".join(lines)


def evidence_automaton(P: PartialTable) -> EvidenceAutomaton:
    nfields = len(P.space.fields)
    glob = P.glob()
    n = max([len(g) for g in glob.values()], default=1)
    ea = EvidenceAutomaton(n)
    positives: List[Tuple[int, int, Packet, Packet]] = []
    kids = P.children()
    for p in P.packets():
        t = P.tables[p]
        singles = [e for e in t.E if len(e) == 1]
        for w in sorted(t.S, key=P._key):
            q = glob[p][t.row(w)]
            for e in singles:
                ea.eps[q] = epp.update(ea.eps[q], p, e[0], t.T[w, e], nfields)
            for b in kids.get(w, ()):
                tb = P.tables[b]
                x = w + (b,)
                q2 = glob[b][tb.row(x)]
                positives.append((q, q2, p, b))
    for q, q2, a, b in positives:
        ea.delta[q][q2] = epp.update(ea.delta[q].get(q2, epp.empty()), a, b, True, nfields)
    for q, q2, a, b in positives:
        for q3 in range(n):
            if q3 != q2:
                ea.delta[q][q3] = epp.update(ea.delta[q].get(q3, epp.empty()), a, b, False, nfields)
    return ea


def sym_convert(store: Store, ea: EvidenceAutomaton) -> Snka:
    eps = [epp.hyp_spp(store, e) for e in ea.eps]
    delta = []
    for q in range(ea.nstates):
        gen = {t: epp.hyp_spp(store, x) for t, x in sorted(ea.delta[q].items())}
        row = {}
        for t, x in gen.items():
            others = store.union_all(y for t2, y in gen.items() if t2 != t)
            row[t] = store.diff(x, others)
        delta.append(row)
    return Snka(store, eps, delta)


def audit_positives(store: Store, ea: EvidenceAutomaton, h: Snka) -> List[tuple]:
    """EA-positive transition pairs the SNKA fails to accept."""
    bad = []
    for q in range(ea.nstates):
        for t, x in ea.delta[q].items():
            for a, b, lab in epp.items(x):
                if lab and not store.eval(h.delta[q].get(t, BOT), a, b):
                    bad.append((q, t, a, b))
    return bad


@dataclass
class SnkaRun:
    result: Snka
    conjectures: int
    mem_queries: int
    equiv_queries: int
    counterexamples: List[Word] = field(default_factory=list)
    state_counts: List[int] = field(default_factory=list)
    sizes: List[Tuple[int, int, int]] = field(default_factory=list)


def learn_snka(teacher: SnkaTeacher, max_rounds: int = 500, audit: bool = True,
               on_iteration: Optional[Callable[[PartialTable, Snka, Optional[Word]], None]] = None) -> SnkaRun:
    """Learn the teacher's language starting from the empty automaton.

    With ``audit`` set each conjecture is checked for determinism, for
    accepting every positive evidence pair, and for classifying every past
    counterexample as the target does.
    """
    store = teacher.store
    oracle = Oracle(teacher)
    P = PartialTable(teacher.space, oracle)
    h = empty_snka(store)
    run = SnkaRun(h, 0, 0, 0)
    while True:
        run.conjectures += 1
        run.state_counts.append(h.nstates)
        c = teacher.equiv(h)
        if on_iteration is not None:
            on_iteration(P, h, c)
        if c is None:
            break
        if len(run.counterexamples) >= max_rounds:
            raise RuntimeError(f"no convergence after {max_rounds} counterexamples")
        c = tuple(c)
        run.counterexamples.append(c)
        P.update(c)
        P.make_consistent()
        run.sizes.append(P.size())
        ea = evidence_automaton(P)
        h = sym_convert(store, ea)
        if audit:
            _audit(store, ea, h, oracle, run.counterexamples)
    run.result = h
    run.mem_queries = teacher.mem_count
    run.equiv_queries = teacher.equiv_count
    return run


def _audit(store: Store, ea: EvidenceAutomaton, h: Snka, oracle: Oracle, cexs: List[Word]) -> None:
    bad = h.audit_determinism()
    if bad is not None:
        raise AssertionError(f"overlapping transitions at state {bad[0]}")
    missing = audit_positives(store, ea, h)
    if missing:
        raise AssertionError(f"positive evidence dropped: {missing[:3]}")
    for c in cexs:
        if run_snka(h, c) != oracle.answers[c]:
            raise AssertionError(f"conjecture misclassifies earlier counterexample {c}")
