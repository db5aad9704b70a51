"""The canonical learner: one observation table per packet, PNKA conjectures.

Prefixes and suffixes are packet tuples.  A prefix ``s`` ends in the packet
``pi`` whose table it belongs to; a suffix ``e`` starts with the packet read
next, so the queried trace is ``s + e``.  Every table starts with all single
packets as suffixes, which is what keeps this learner to tiny packet spaces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .automata import Pnka, run_pnka
from .core import Packet, PacketSpace, shortlex_key
from .teacher import SnkaTeacher

Word = Tuple[Packet, ...]


class Oracle:
    """Membership answers memoized by trace."""

    def __init__(self, teacher):
        self.teacher = teacher
        self.answers: Dict[Word, bool] = {}

    def __call__(self, w: Word) -> bool:
        got = self.answers.get(w)
        if got is None:
            got = self.answers[w] = self.teacher.mem(w)
        return got


class PacketTable:
    """Prefixes ``S`` and suffixes ``E`` in insertion order, cells in ``T``."""

    def __init__(self, S: Sequence[Word] = (), E: Sequence[Word] = ()):
        self.S: List[Word] = []
        self.E: List[Word] = []
        self.T: Dict[Tuple[Word, Word], bool] = {}
        self._S: Set[Word] = set()
        self._E: Set[Word] = set()
        for s in S:
            self.add_prefix(s)
        for e in E:
            self.add_suffix(e)

    def has_prefix(self, s: Word) -> bool:
        return s in self._S

    def row(self, s: Word) -> Tuple[bool, ...]:
        return tuple(self.T[s, e] for e in self.E)

    def add_prefix(self, s: Word) -> bool:
        if s in self._S:
            return False
        self._S.add(s)
        self.S.append(s)
        return True

    def add_suffix(self, e: Word) -> bool:
        if e in self._E:
            return False
        self._E.add(e)
        self.E.append(e)
        return True


class ObservationTable:
    def __init__(self, space: PacketSpace, oracle: Oracle):
        self.space = space
        self.packets: List[Packet] = list(space.packets())
        self.oracle = oracle
        self.tables: Dict[Packet, PacketTable] = {
            p: PacketTable([(p,)], [(b,) for b in self.packets]) for p in self.packets}
        self._key = lambda w: shortlex_key(space, w)

    def ext(self, p: Packet) -> List[Word]:
        """Extension prefixes ``s + (p,)`` for every ``s`` in any table."""
        out = {s + (p,) for t in self.tables.values() for s in t.S}
        return sorted(out, key=self._key)

    def domain(self, p: Packet) -> List[Word]:
        t = self.tables[p]
        return list(t.S) + [s for s in self.ext(p) if not t.has_prefix(s)]

    def extend(self) -> int:
        """Fill every missing cell; returns the number of cells filled."""
        filled = 0
        for p, t in self.tables.items():
            for s in self.domain(p):
                for e in t.E:
                    if (s, e) not in t.T:
                        t.T[s, e] = self.oracle(s + e)
                        filled += 1
        return filled

    def unclosed(self) -> Optional[Tuple[Packet, Word]]:
        for p in self.packets:
            t = self.tables[p]
            rows = {t.row(s) for s in t.S}
            for s in self.ext(p):
                if t.row(s) not in rows:
                    return p, s
        return None

    def inconsistent(self) -> Optional[Tuple[Packet, Word]]:
        """A table and the suffix to add to it, or None."""
        for p in self.packets:
            t = self.tables[p]
            prefixes = sorted(t.S, key=self._key)
            for i, s in enumerate(prefixes):
                for s2 in prefixes[i + 1:]:
                    if t.row(s) != t.row(s2):
                        continue
                    for b in self.packets:
                        tb = self.tables[b]
                        for e in tb.E:
                            if tb.T[s + (b,), e] != tb.T[s2 + (b,), e]:
                                return p, (b,) + e
        return None

    def make_closed(self) -> bool:
        got = self.unclosed()
        if got is None:
            return False
        p, s = got
        self.tables[p].add_prefix(s)
        self.extend()
        return True

    def make_consistent(self) -> bool:
        got = self.inconsistent()
        if got is None:
            return False
        p, e = got
        self.tables[p].add_suffix(e)
        self.extend()
        return True

    def update(self, c: Word) -> None:
        for i in range(1, len(c)):
            s = c[:i]
            self.tables[s[-1]].add_prefix(s)
        self.extend()

    def states(self) -> List[Tuple[Packet, Tuple[bool, ...]]]:
        out = []
        for p in self.packets:
            t = self.tables[p]
            seen = {}
            for s in sorted(t.S, key=self._key):
                seen.setdefault(t.row(s), None)
            out.extend((p, r) for r in seen)
        return out

    def hypothesis(self) -> Pnka:
        sp = self.space
        states = self.states()
        num = {q: i for i, q in enumerate(states)}
        access: Dict[Tuple[Packet, Tuple[bool, ...]], Word] = {}
        for p in self.packets:
            t = self.tables[p]
            for s in sorted(t.S, key=self._key):
                access.setdefault((p, t.row(s)), s)
        n, k = sp.size, len(states)
        start = np.array([num[p, self.tables[p].row((p,))] for p in self.packets])
        delta = np.zeros((k, n), dtype=np.int64)
        lam = np.zeros((k, n), dtype=bool)
        spell = np.zeros(k, dtype=np.int64)
        for (p, r), i in num.items():
            s = access[p, r]
            t = self.tables[p]
            spell[i] = sp.index_of(p)
            for bi, b in enumerate(self.packets):
                delta[i, bi] = num[b, self.tables[b].row(s + (b,))]
                lam[i, bi] = t.T[s, (b,)]
        return Pnka(sp, start, delta, lam, spell)

    def disagreements(self, h: Pnka) -> List[Tuple[Word, Word]]:
        """Cells on which ``h`` differs from the table."""
        bad = []
        for p, t in self.tables.items():
            for s in self.domain(p):
                for e in t.E:
                    if run_pnka(h, s + e) != t.T[s, e]:
                        bad.append((s, e))
        return bad

    def dump(self) -> str:
        fmt = lambda w: " ".join(f"[{self.space.format_packet(x)}]" for x in w)
        lines = []
        for p in self.packets:
            t = self.tables[p]
            lines.append(f"table [{self.space.format_packet(p)}] S={len(t.S)} E={len(t.E)}")
            lines.append("  E: " + " | ".join(fmt(e) for e in t.E))
            for s in self.domain(p):
                mark = "S " if t.has_prefix(s) else "S'"
                bits = "".join("1" if b else "0" for b in t.row(s))
                lines.append(f"  {mark} {fmt(s)} : {bits}")
        return "\n".join(lines)


@dataclass
class PnkaRun:
    result: Pnka
    conjectures: int
    state_counts: List[int]
    counterexamples: List[Word]
    mem_queries: int
    equiv_queries: int


def learn_pnka(teacher: SnkaTeacher, max_rounds: int = 1000, audit: bool = True,
               on_iteration: Optional[Callable[[ObservationTable, Pnka, Optional[Word]], None]] = None) -> PnkaRun:
    """Run the canonical learner against ``teacher``.

    With ``audit`` set every conjecture is checked against every table cell.
    """
    table = ObservationTable(teacher.space, Oracle(teacher))
    table.extend()
    counts: List[int] = []
    cexs: List[Word] = []
    for _ in range(max_rounds):
        while table.make_closed() or table.make_consistent():
            pass
        h = table.hypothesis()
        if audit:
            bad = table.disagreements(h)
            if bad:
                raise AssertionError(f"conjecture disagrees with table cells {bad[:3]}")
        counts.append(h.nstates)
        c = teacher.equiv(h)
        if on_iteration is not None:
            on_iteration(table, h, c)
        if c is None:
            return PnkaRun(h, len(counts), counts, cexs, teacher.mem_count, teacher.equiv_count)
        cexs.append(tuple(c))
        table.update(tuple(c))
    raise RuntimeError(f"no convergence after {max_rounds} conjectures")
