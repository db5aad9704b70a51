"""Symbolic packet programs (SPPs) and packet predicates (SPs).

Both live in a :class:`Store`, an interning arena tied to one packet space.
Diagrams are referred to by integer ids: for SPPs ``BOT`` (``0``) is drop and
``TOP`` (``1``) is skip; packet predicates use their own id space where
``SP_EMPTY`` and ``SP_FULL`` play the same roles.

An SPP node tests one field and stores, for *every* input value of that field,
the row ``output value -> child``.  Keeping rows dense over the finite domain
makes the representation canonical: two diagrams denote the same relation iff
they have the same id.  The sparse ``(branches, muts, default)`` reading used
for sizing and display is derived from the rows by :meth:`Store.sparse`.
"""
from __future__ import annotations

from collections import Counter
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .core import Expr, Packet, PacketSpace, Drop, Skip, Test, TestNe, Assign, Dup, Union, Seq, Star

BOT = 0
TOP = 1
SP_EMPTY = 0
SP_FULL = 1

Row = Tuple[Tuple[int, int], ...]


class Store:
    def __init__(self, space: PacketSpace):
        self.space = space
        self.nfields = len(space.fields)
        self._dsize = [len(d) for d in space.domains]
        self._vidx = [{v: i for i, v in enumerate(d)} for d in space.domains]
        # SPP arena: id -> (level, rows); leaves sit at level nfields
        self._nodes: List[Tuple[int, Tuple[Row, ...]]] = [(self.nfields, ()), (self.nfields, ())]
        self._unique: Dict[Tuple[int, Tuple[Row, ...]], int] = {}
        # SP arena: id -> (level, children)
        self._sp_nodes: List[Tuple[int, Tuple[int, ...]]] = [(self.nfields, ()), (self.nfields, ())]
        self._sp_unique: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        self._cache: Dict[tuple, int] = {}
        self._sparse: Dict[int, tuple] = {}

    def __len__(self) -> int:
        return len(self._nodes)

    # -- node construction -------------------------------------------------

    def level(self, s: int) -> int:
        return self._nodes[s][0]

    def rows(self, s: int) -> Tuple[Row, ...]:
        return self._nodes[s][1]

    def _mk(self, level: int, rows: Sequence[Row]) -> int:
        rows = tuple(rows)
        first = rows[0]
        if len(first) == 1 and first[0][0] == 0:
            child = first[0][1]
            if all(len(r) == 1 and r[0] == (v, child) for v, r in enumerate(rows)):
                return child
        if not any(rows):
            return BOT
        key = (level, rows)
        got = self._unique.get(key)
        if got is None:
            got = len(self._nodes)
            self._nodes.append(key)
            self._unique[key] = got
        return got

    def _expand(self, s: int, level: int) -> Tuple[Row, ...]:
        if self._nodes[s][0] == level:
            return self._nodes[s][1]
        if s == BOT:
            return ((),) * self._dsize[level]
        return tuple(((v, s),) for v in range(self._dsize[level]))

    def mk_node(self, field: str | int, branches: Mapping[int, Mapping[int, int]],
                muts: Mapping[int, int], default: int) -> int:
        """Smart constructor from the sparse form.

        ``branches`` maps a tested input value to its ``output -> child`` map;
        every untested input value ``v`` behaves like ``muts`` plus
        ``v -> default`` when ``v`` is not itself a mut key.  Values are field
        values, not indices.
        """
        level = field if isinstance(field, int) else self.space.field_index(field)
        children = [c for m in branches.values() for c in m.values()]
        children += list(muts.values()) + [default]
        assert all(self.level(c) > level for c in children), "field order violated"
        vidx = self._vidx[level]
        dom = self.space.domains[level]
        m = {vidx[w]: c for w, c in muts.items() if c != BOT}
        mkeys = {vidx[w] for w in muts}
        rows = []
        for vi, v in enumerate(dom):
            if v in branches:
                row = {vidx[w]: c for w, c in branches[v].items() if c != BOT}
            else:
                row = dict(m)
                if vi not in mkeys and default != BOT:
                    row[vi] = default
            rows.append(tuple(sorted(row.items())))
        return self._mk(level, rows)

    def from_pair(self, a: Packet, b: Packet) -> int:
        s = TOP
        for lvl in reversed(range(self.nfields)):
            vi, wi = self._vidx[lvl][a[lvl]], self._vidx[lvl][b[lvl]]
            rows = [()] * self._dsize[lvl]
            rows[vi] = ((wi, s),)
            s = self._mk(lvl, rows)
        return s

    def from_pairs(self, pairs: Iterable[Tuple[Packet, Packet]]) -> int:
        out = BOT
        for a, b in pairs:
            out = self.union(out, self.from_pair(a, b))
        return out

    # -- semantics -----------------------------------------------------------

    def eval(self, s: int, a: Packet, b: Packet) -> bool:
        lvl = 0
        while s > TOP:
            nl, rows = self._nodes[s]
            for k in range(lvl, nl):
                if a[k] != b[k]:
                    return False
            vi = self._vidx[nl][a[nl]]
            wi = self._vidx[nl][b[nl]]
            for w, c in rows[vi]:
                if w == wi:
                    s = c
                    break
            else:
                return False
            lvl = nl + 1
        if s == BOT:
            return False
        return all(a[k] == b[k] for k in range(lvl, self.nfields))

    def pairs(self, s: int) -> Iterator[Tuple[Packet, Packet]]:
        """All accepted pairs, in index order (small spaces only)."""
        doms = self.space.domains

        def go(s, lvl):
            if lvl == self.nfields:
                if s == TOP:
                    yield (), ()
                return
            if s == BOT:
                return
            if self.level(s) > lvl:
                for v in doms[lvl]:
                    for a, b in go(s, lvl + 1):
                        yield (v,) + a, (v,) + b
                return
            for vi, row in enumerate(self.rows(s)):
                for wi, c in row:
                    for a, b in go(c, lvl + 1):
                        yield (doms[lvl][vi],) + a, (doms[lvl][wi],) + b

        return go(s, 0)

    def choose_pair(self, s: int) -> Optional[Tuple[Packet, Packet]]:
        """Some accepted pair; smallest values first, skipped fields at their minimum."""
        if s == BOT:
            return None
        doms = self.space.domains
        a, b = [], []
        for lvl in range(self.nfields):
            if self.level(s) > lvl:
                a.append(doms[lvl][0])
                b.append(doms[lvl][0])
                continue
            for vi, row in enumerate(self.rows(s)):
                if row:
                    wi, s = row[0]
                    a.append(doms[lvl][vi])
                    b.append(doms[lvl][wi])
                    break
        return tuple(a), tuple(b)

    # -- algebra -------------------------------------------------------------

    def union(self, x: int, y: int) -> int:
        if x == y or y == BOT:
            return x
        if x == BOT:
            return y
        if x > y:
            x, y = y, x
        key = ("or", x, y)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.level(x), self.level(y))
        rows = []
        for rx, ry in zip(self._expand(x, lvl), self._expand(y, lvl)):
            acc = dict(rx)
            for w, c in ry:
                acc[w] = self.union(acc[w], c) if w in acc else c
            rows.append(tuple(sorted(acc.items())))
        got = self._cache[key] = self._mk(lvl, rows)
        return got

    def intersect(self, x: int, y: int) -> int:
        if x == y:
            return x
        if x == BOT or y == BOT:
            return BOT
        if x > y:
            x, y = y, x
        key = ("and", x, y)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.level(x), self.level(y))
        rows = []
        for rx, ry in zip(self._expand(x, lvl), self._expand(y, lvl)):
            dy = dict(ry)
            row = []
            for w, c in rx:
                if w in dy:
                    k = self.intersect(c, dy[w])
                    if k != BOT:
                        row.append((w, k))
            rows.append(tuple(row))
        got = self._cache[key] = self._mk(lvl, rows)
        return got

    def diff(self, x: int, y: int) -> int:
        if x == y or x == BOT:
            return BOT
        if y == BOT:
            return x
        key = ("diff", x, y)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.level(x), self.level(y))
        rows = []
        for rx, ry in zip(self._expand(x, lvl), self._expand(y, lvl)):
            dy = dict(ry)
            row = []
            for w, c in rx:
                k = self.diff(c, dy.get(w, BOT))
                if k != BOT:
                    row.append((w, k))
            rows.append(tuple(row))
        got = self._cache[key] = self._mk(lvl, rows)
        return got

    def xor(self, x: int, y: int) -> int:
        if x == y:
            return BOT
        if x == BOT:
            return y
        if y == BOT:
            return x
        if x > y:
            x, y = y, x
        key = ("xor", x, y)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.level(x), self.level(y))
        rows = []
        for rx, ry in zip(self._expand(x, lvl), self._expand(y, lvl)):
            dx, dy = dict(rx), dict(ry)
            row = []
            for w in sorted(dx.keys() | dy.keys()):
                k = self.xor(dx.get(w, BOT), dy.get(w, BOT))
                if k != BOT:
                    row.append((w, k))
            rows.append(tuple(row))
        got = self._cache[key] = self._mk(lvl, rows)
        return got

    def union_all(self, items: Iterable[int]) -> int:
        out = BOT
        for s in items:
            out = self.union(out, s)
        return out

    def seq(self, x: int, y: int) -> int:
        """Relational composition: first ``x`` then ``y``."""
        if x == BOT or y == BOT:
            return BOT
        if x == TOP:
            return y
        if y == TOP:
            return x
        key = ("seq", x, y)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.level(x), self.level(y))
        ry = self._expand(y, lvl)
        rows = []
        for rx in self._expand(x, lvl):
            acc: Dict[int, int] = {}
            for w, cx in rx:
                for u, cy in ry[w]:
                    k = self.seq(cx, cy)
                    if k != BOT:
                        acc[u] = self.union(acc[u], k) if u in acc else k
            rows.append(tuple(sorted(acc.items())))
        got = self._cache[key] = self._mk(lvl, rows)
        return got

    def star(self, x: int) -> int:
        key = ("star", x)
        got = self._cache.get(key)
        if got is not None:
            return got
        z = self.union(TOP, x)
        while True:
            nxt = self.seq(z, z)
            if nxt == z:
                break
            z = nxt
        self._cache[key] = z
        return z

    def compile(self, e: Expr) -> int:
        """The SPP of a dup-free expression."""
        if isinstance(e, Drop):
            return BOT
        if isinstance(e, Skip):
            return TOP
        if isinstance(e, (Test, TestNe, Assign)):
            lvl = self.space.field_index(e.field)
            self.space.check_value(e.field, e.value)
            vi = self._vidx[lvl][e.value]
            n = self._dsize[lvl]
            if isinstance(e, Test):
                rows = [((v, TOP),) if v == vi else () for v in range(n)]
            elif isinstance(e, TestNe):
                rows = [((v, TOP),) if v != vi else () for v in range(n)]
            else:
                rows = [((vi, TOP),)] * n
            return self._mk(lvl, rows)
        if isinstance(e, Union):
            return self.union(self.compile(e.left), self.compile(e.right))
        if isinstance(e, Seq):
            return self.seq(self.compile(e.left), self.compile(e.right))
        if isinstance(e, Star):
            return self.star(self.compile(e.body))
        if isinstance(e, Dup):
            raise ValueError("dup cannot be compiled to an SPP")
        raise TypeError(f"not an expression: {e!r}")

    # -- sparse reading, size, dumps ------------------------------------------

    def sparse(self, s: int):
        """``(branches, muts, default)`` of a node, in domain-index space.

        The default child and mut map are picked to make the branch map as
        small as possible; the choice is a fixed function of the rows, so it
        is as canonical as the node itself.
        """
        got = self._sparse.get(s)
        if got is not None:
            return got
        rows = [dict(r) for r in self.rows(s)]
        n = len(rows)
        cands = [BOT] + sorted({r[v] for v, r in enumerate(rows) if v in r})
        best = None
        for ci, d in enumerate(cands):
            muts = {}
            for w in range(n):
                counts: Counter = Counter()
                for v in range(n):
                    got_c = rows[v].get(w, BOT)
                    if v != w:
                        counts[got_c] += 1
                    else:
                        if got_c != BOT:
                            counts[got_c] += 1
                        if got_c == d:
                            counts[BOT] += 1
                pick = max(counts, key=lambda c: (counts[c], c == BOT, -c)) if counts else BOT
                if pick != BOT:
                    muts[w] = pick
            branches = {}
            for v in range(n):
                dr = dict(muts)
                if v not in muts and d != BOT:
                    dr[v] = d
                if rows[v] != dr:
                    branches[v] = rows[v]
            cost = len(branches) + sum(len(b) for b in branches.values()) + len(muts)
            rank = (cost, len(branches), ci)
            if best is None or rank < best[0]:
                best = (rank, (branches, muts, d))
        self._sparse[s] = best[1]
        return best[1]

    def mu(self, s: int) -> int:
        """Total number of map keys over the distinct nodes reachable from ``s``."""
        seen = set()
        total = 0
        stack = [s]
        while stack:
            x = stack.pop()
            if x <= TOP or x in seen:
                continue
            seen.add(x)
            branches, muts, d = self.sparse(x)
            total += len(branches) + sum(len(b) for b in branches.values()) + len(muts)
            for b in branches.values():
                stack.extend(b.values())
            stack.extend(muts.values())
            stack.append(d)
        return total

    def size(self, s: int) -> int:
        """Number of distinct internal nodes reachable from ``s``."""
        seen = set()
        stack = [s]
        while stack:
            x = stack.pop()
            if x <= TOP or x in seen:
                continue
            seen.add(x)
            stack.extend(c for r in self.rows(x) for _, c in r)
        return len(seen)

    def dump(self, s: int) -> str:
        """Adjacency listing of the sparse reading, one node per line."""
        out = []
        seen = set()
        order = []
        stack = [s]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            order.append(x)
            if x > TOP:
                branches, muts, d = self.sparse(x)
                kids = [c for b in branches.values() for c in b.values()] + list(muts.values()) + [d]
                stack.extend(reversed(kids))
        names = {BOT: "drop", TOP: "skip"}
        for x in sorted(order):
            if x <= TOP:
                continue
            lvl = self.level(x)
            dom = self.space.domains[lvl]
            branches, muts, d = self.sparse(x)
            parts = []
            for v in sorted(branches):
                inner = ",".join(f"{dom[w]}->{names.get(c, c)}" for w, c in sorted(branches[v].items()))
                parts.append(f"{dom[v]}:{{{inner}}}")
            mtxt = ",".join(f"{dom[w]}->{names.get(c, c)}" for w, c in sorted(muts.items()))
            out.append(f"{x} {self.space.fields[lvl]} branch[{' '.join(parts)}] "
                       f"mut[{mtxt}] default {names.get(d, d)}")
        if not out:
            out.append(names[s])
        else:
            out.insert(0, f"root {s}")
        return "\n".join(out)

    # -- packet predicates ---------------------------------------------------

    def sp_level(self, r: int) -> int:
        return self._sp_nodes[r][0]

    def _mk_sp(self, level: int, children: Sequence[int]) -> int:
        children = tuple(children)
        if all(c == children[0] for c in children):
            return children[0]
        key = (level, children)
        got = self._sp_unique.get(key)
        if got is None:
            got = len(self._sp_nodes)
            self._sp_nodes.append(key)
            self._sp_unique[key] = got
        return got

    def _sp_expand(self, r: int, level: int) -> Tuple[int, ...]:
        lvl, kids = self._sp_nodes[r]
        if lvl == level:
            return kids
        return (r,) * self._dsize[level]

    def sp_from_packet(self, pk: Packet) -> int:
        r = SP_FULL
        for lvl in reversed(range(self.nfields)):
            kids = [SP_EMPTY] * self._dsize[lvl]
            kids[self._vidx[lvl][pk[lvl]]] = r
            r = self._mk_sp(lvl, kids)
        return r

    def sp_from_packets(self, pks: Iterable[Packet]) -> int:
        out = SP_EMPTY
        for pk in pks:
            out = self.sp_union(out, self.sp_from_packet(pk))
        return out

    def sp_contains(self, r: int, pk: Packet) -> bool:
        while r > SP_FULL:
            lvl, kids = self._sp_nodes[r]
            r = kids[self._vidx[lvl][pk[lvl]]]
        return r == SP_FULL

    def sp_is_empty(self, r: int) -> bool:
        return r == SP_EMPTY

    def _sp_binop(self, tag: str, x: int, y: int, leaf) -> int:
        got = leaf(x, y)
        if got is not None:
            return got
        if tag != "spdiff" and x > y:
            x, y = y, x
        key = (tag, x, y)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.sp_level(x), self.sp_level(y))
        kids = [self._sp_binop(tag, a, b, leaf)
                for a, b in zip(self._sp_expand(x, lvl), self._sp_expand(y, lvl))]
        got = self._cache[key] = self._mk_sp(lvl, kids)
        return got

    @staticmethod
    def _or_leaf(x, y):
        if x == y or y == SP_EMPTY or x == SP_FULL:
            return x
        if x == SP_EMPTY or y == SP_FULL:
            return y
        return None

    @staticmethod
    def _and_leaf(x, y):
        if x == y or y == SP_FULL or x == SP_EMPTY:
            return x
        if x == SP_FULL or y == SP_EMPTY:
            return y
        return None

    @staticmethod
    def _diff_leaf(x, y):
        if x == y or x == SP_EMPTY or y == SP_FULL:
            return SP_EMPTY
        if y == SP_EMPTY:
            return x
        return None

    def sp_union(self, x: int, y: int) -> int:
        return self._sp_binop("spor", x, y, self._or_leaf)

    def sp_intersect(self, x: int, y: int) -> int:
        return self._sp_binop("spand", x, y, self._and_leaf)

    def sp_diff(self, x: int, y: int) -> int:
        return self._sp_binop("spdiff", x, y, self._diff_leaf)

    def sp_choose(self, r: int) -> Optional[Packet]:
        if r == SP_EMPTY:
            return None
        doms = self.space.domains
        out = []
        for lvl in range(self.nfields):
            if self.sp_level(r) > lvl:
                out.append(doms[lvl][0])
                continue
            for vi, c in enumerate(self._sp_nodes[r][1]):
                if c != SP_EMPTY:
                    out.append(doms[lvl][vi])
                    r = c
                    break
        return tuple(out)

    def sp_packets(self, r: int) -> Iterator[Packet]:
        for pk in self.space.packets():
            if self.sp_contains(r, pk):
                yield pk

    def image(self, r: int, s: int) -> int:
        """Packets ``b`` with ``(a, b)`` accepted by ``s`` for some ``a`` in ``r``."""
        if r == SP_EMPTY or s == BOT:
            return SP_EMPTY
        if s == TOP:
            return r
        key = ("img", r, s)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.sp_level(r), self.level(s))
        rk = self._sp_expand(r, lvl)
        acc = [SP_EMPTY] * self._dsize[lvl]
        for v, row in enumerate(self._expand(s, lvl)):
            if rk[v] == SP_EMPTY:
                continue
            for w, c in row:
                acc[w] = self.sp_union(acc[w], self.image(rk[v], c))
        got = self._cache[key] = self._mk_sp(lvl, acc)
        return got

    def preimage(self, r: int, s: int) -> int:
        """Packets ``a`` with ``(a, b)`` accepted by ``s`` for some ``b`` in ``r``."""
        if r == SP_EMPTY or s == BOT:
            return SP_EMPTY
        if s == TOP:
            return r
        key = ("pre", r, s)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl = min(self.sp_level(r), self.level(s))
        rk = self._sp_expand(r, lvl)
        acc = []
        for row in self._expand(s, lvl):
            k = SP_EMPTY
            for w, c in row:
                if rk[w] != SP_EMPTY:
                    k = self.sp_union(k, self.preimage(rk[w], c))
            acc.append(k)
        got = self._cache[key] = self._mk_sp(lvl, acc)
        return got

    def id_of(self, r: int) -> int:
        """The identity relation restricted to ``r``."""
        if r == SP_EMPTY:
            return BOT
        if r == SP_FULL:
            return TOP
        key = ("id", r)
        got = self._cache.get(key)
        if got is not None:
            return got
        lvl, kids = self._sp_nodes[r]
        rows = []
        for v, c in enumerate(kids):
            k = self.id_of(c)
            rows.append(((v, k),) if k != BOT else ())
        got = self._cache[key] = self._mk(lvl, rows)
        return got
