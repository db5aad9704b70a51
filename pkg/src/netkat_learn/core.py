"""Packets, guarded strings and NetKAT expressions.

A packet is a tuple of field values ordered like the fields of its
:class:`PacketSpace`.  Guarded strings, prefixes and suffixes are tuples of
packets; the ``dup`` markers are implicit between consecutive packets, so
``(a, b)`` is the dup-free string ``a b`` and ``(a, p, b)`` is ``a (p dup) b``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

Packet = Tuple[int, ...]
GuardedString = Tuple[Packet, ...]


class ParseError(ValueError):
    """Malformed concrete syntax (expression, trace or packet-space file)."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


_FIELD_LINE = re.compile(r"field\s+(?P<name>[A-Za-z_]\w*)\s+(?:(?P<size>\d+)|(?P<lo>\d+)\.\.(?P<hi>\d+))")


@dataclass(frozen=True)
class PacketSpace:
    fields: Tuple[str, ...]
    domains: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.fields)) != len(self.fields):
            raise ValueError("field names must be unique")
        if len(self.fields) != len(self.domains):
            raise ValueError("one domain per field")
        for name, dom in zip(self.fields, self.domains):
            if not dom:
                raise ValueError(f"empty domain for field {name!r}")
            if list(dom) != sorted(set(dom)):
                raise ValueError(f"domain of {name!r} must be sorted and distinct")
        object.__setattr__(self, "_vidx", tuple({v: i for i, v in enumerate(d)} for d in self.domains))

    @classmethod
    def of(cls, **sizes_or_values) -> "PacketSpace":
        """``PacketSpace.of(f=3, g=[1, 2])``: an int means ``range(n)``."""
        fields, domains = [], []
        for name, dom in sizes_or_values.items():
            fields.append(name)
            if isinstance(dom, int):
                dom = range(dom)
            domains.append(tuple(sorted(set(dom))))
        return cls(tuple(fields), tuple(domains))

    @classmethod
    def parse(cls, text: str) -> "PacketSpace":
        """Read ``field <name> <size>`` or ``field <name> <lo>..<hi>`` lines; ``#`` starts a comment."""
        fields, domains = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = _FIELD_LINE.fullmatch(line)
            if m is None:
                raise ParseError(f"line {lineno}: expected 'field <name> <size>' or 'field <name> <lo>..<hi>'")
            if m["size"] is not None:
                dom = range(int(m["size"]))
            else:
                dom = range(int(m["lo"]), int(m["hi"]) + 1)
            if not dom:
                raise ParseError(f"line {lineno}: empty domain")
            fields.append(m["name"])
            domains.append(tuple(dom))
        if not fields:
            raise ParseError("packet space declares no fields")
        return cls(tuple(fields), tuple(domains))

    def to_text(self) -> str:
        lines = []
        for name, dom in zip(self.fields, self.domains):
            if dom == tuple(range(len(dom))):
                lines.append(f"field {name} {len(dom)}")
            elif dom == tuple(range(dom[0], dom[-1] + 1)):
                lines.append(f"field {name} {dom[0]}..{dom[-1]}")
            else:
                raise ValueError(f"domain of {name!r} is not a contiguous range")
        return "\n".join(lines) + "\n"

    # -- packets ---------------------------------------------------------

    @property
    def size(self) -> int:
        n = 1
        for dom in self.domains:
            n *= len(dom)
        return n

    def field_index(self, name: str) -> int:
        try:
            return self.fields.index(name)
        except ValueError:
            raise KeyError(f"unknown field {name!r}") from None

    def check_value(self, name: str, value: int) -> None:
        if value not in self.domains[self.field_index(name)]:
            raise ValueError(f"value {value} outside the domain of {name!r}")

    def packets(self) -> Iterator[Packet]:
        return itertools.product(*self.domains)

    def packet(self, **values: int) -> Packet:
        missing = set(self.fields) - set(values)
        if missing or set(values) - set(self.fields):
            raise ValueError(f"packet must assign exactly {self.fields}")
        for name, v in values.items():
            self.check_value(name, v)
        return tuple(values[f] for f in self.fields)

    def index_of(self, pk: Packet) -> int:
        """Mixed-radix index of a packet; first field is most significant."""
        idx = 0
        for v, vidx in zip(pk, self._vidx):
            idx = idx * len(vidx) + vidx[v]
        return idx

    def packet_at(self, idx: int) -> Packet:
        vals = []
        for dom in reversed(self.domains):
            idx, r = divmod(idx, len(dom))
            vals.append(dom[r])
        return tuple(reversed(vals))

    def zero(self) -> Packet:
        """The packet filling every field with its smallest value."""
        return tuple(dom[0] for dom in self.domains)

    def format_packet(self, pk: Packet) -> str:
        return ",".join(f"{f}={v}" for f, v in zip(self.fields, pk))

    def parse_packet(self, text: str) -> Packet:
        values = {}
        for item in text.split(","):
            name, sep, val = item.strip().partition("=")
            if not sep or not val.strip().isdigit():
                raise ParseError(f"bad packet component {item.strip()!r}")
            values[name.strip()] = int(val)
        try:
            return self.packet(**values)
        except (KeyError, ValueError) as exc:
            raise ParseError(str(exc)) from None

    def format_trace(self, w: Sequence[Packet]) -> str:
        return ";".join(self.format_packet(p) for p in w)

    def parse_trace(self, text: str) -> GuardedString:
        w = tuple(self.parse_packet(t) for t in text.split(";") if t.strip())
        if len(w) < 2:
            raise ParseError("a guarded string needs at least two packets")
        return w


# -- guarded strings -------------------------------------------------------

def gs_concat(u: GuardedString, v: GuardedString) -> Optional[GuardedString]:
    """``a x b <> c y d = a x y d`` when ``b == c``; None otherwise."""
    if u[-1] != v[0]:
        return None
    return u[:-1] + v[1:]


def last(p: Sequence[Packet]) -> Packet:
    return p[-1]


def prefix_concat(p: GuardedString, w: GuardedString) -> Optional[GuardedString]:
    """Attach a guarded string to a prefix ending in its first packet."""
    if p[-1] != w[0]:
        return None
    return tuple(p) + tuple(w[1:])


def join(p: Sequence[Packet], e: Sequence[Packet]) -> GuardedString:
    return tuple(p) + tuple(e)


def dups(w: Sequence[Packet]) -> int:
    return len(w) - 2


def splits(w: GuardedString) -> Iterator[Tuple[GuardedString, GuardedString]]:
    """Every way of writing ``w`` as prefix + suffix, shortest prefix first."""
    for i in range(1, len(w)):
        yield w[:i], w[i:]


def shortlex_key(space: PacketSpace, w: Sequence[Packet]):
    # domains are sorted, so packet tuples already compare in index order
    return (len(w), tuple(w))


# -- expressions -----------------------------------------------------------

class Expr:
    __slots__ = ()

    def __add__(self, other: "Expr") -> "Expr":
        return Union(self, other)

    def __rshift__(self, other: "Expr") -> "Expr":
        return Seq(self, other)

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True, repr=False)
class Drop(Expr):
    def __repr__(self):
        return "Drop()"


@dataclass(frozen=True, repr=False)
class Skip(Expr):
    def __repr__(self):
        return "Skip()"


@dataclass(frozen=True)
class Test(Expr):
    field: str
    value: int


@dataclass(frozen=True)
class TestNe(Expr):
    field: str
    value: int


@dataclass(frozen=True)
class Assign(Expr):
    field: str
    value: int


@dataclass(frozen=True, repr=False)
class Dup(Expr):
    def __repr__(self):
        return "Dup()"


@dataclass(frozen=True)
class Union(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Seq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Star(Expr):
    body: Expr


def union_all(exprs) -> Expr:
    out = None
    for e in exprs:
        out = e if out is None else Union(out, e)
    return Drop() if out is None else out


def seq_all(exprs) -> Expr:
    out = None
    for e in exprs:
        out = e if out is None else Seq(out, e)
    return Skip() if out is None else out


def has_dup(e: Expr) -> bool:
    if isinstance(e, Dup):
        return True
    if isinstance(e, (Union, Seq)):
        return has_dup(e.left) or has_dup(e.right)
    if isinstance(e, Star):
        return has_dup(e.body)
    return False


def check_expr(e: Expr, space: PacketSpace) -> None:
    """Raise if ``e`` mentions a field or value the space does not have."""
    if isinstance(e, (Test, TestNe, Assign)):
        space.check_value(e.field, e.value)
    elif isinstance(e, (Union, Seq)):
        check_expr(e.left, space)
        check_expr(e.right, space)
    elif isinstance(e, Star):
        check_expr(e.body, space)


_PREC = {Union: 0, Seq: 1, Star: 2}


def format_expr(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Drop):
        return "drop"
    if isinstance(e, Skip):
        return "skip"
    if isinstance(e, Dup):
        return "dup"
    if isinstance(e, Test):
        return f"{e.field}={e.value}"
    if isinstance(e, TestNe):
        return f"{e.field}!={e.value}"
    if isinstance(e, Assign):
        return f"{e.field}:={e.value}"
    if isinstance(e, Star):
        return format_expr(e.body, 2) + "*"
    op = " + " if isinstance(e, Union) else ";"
    mine = _PREC[type(e)]
    text = format_expr(e.left, mine) + op + format_expr(e.right, mine + 1)
    return f"({text})" if mine < prec else text


_TOKEN = re.compile(r"\s*(?:(?P<op>:=|!=|=|\+|;|·|\*|\(|\))|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str):
    pos, toks = 0, []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        val = m.group(kind)
        toks.append((kind, ";" if val == "·" else val, m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, space: Optional[PacketSpace]):
        self.toks = _tokenize(text)
        self.i = 0
        self.space = space

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def union(self):
        e = self.seq()
        while self.peek()[1] == "+":
            self.take()
            e = Union(e, self.seq())
        return e

    def seq(self):
        e = self.star()
        while self.peek()[1] == ";":
            self.take()
            e = Seq(e, self.star())
        return e

    def star(self):
        e = self.atom()
        while self.peek()[1] == "*":
            self.take()
            e = Star(e)
        return e

    def atom(self):
        kind, val, pos = self.peek()
        if val == "(":
            self.take()
            e = self.union()
            self.take(")")
            return e
        if kind != "id":
            raise ParseError(f"unexpected {val or 'end of input'!r}", pos)
        self.take()
        if val in ("drop", "skip", "dup"):
            return {"drop": Drop, "skip": Skip, "dup": Dup}[val]()
        op = self.peek()
        if op[1] not in ("=", "!=", ":="):
            raise ParseError(f"expected '=', '!=' or ':=' after field {val!r}", op[2])
        self.take()
        num = self.peek()
        if num[0] != "num":
            raise ParseError("expected a value", num[2])
        self.take()
        value = int(num[1])
        if self.space is not None:
            try:
                self.space.check_value(val, value)
            except (KeyError, ValueError) as exc:
                raise ParseError(str(exc).strip('"'), pos) from None
        return {"=": Test, "!=": TestNe, ":=": Assign}[op[1]](val, value)


def parse_expr(text: str, space: Optional[PacketSpace] = None) -> Expr:
    """Parse NetKAT concrete syntax.

    ``*`` binds tightest, then ``;`` (or ``·``), then ``+``.  When ``space``
    is given every field and value is checked against it.
    """
    p = _Parser(text, space)
    e = p.union()
    tok = p.peek()
    if tok[0] != "eof":
        raise ParseError(f"unexpected {tok[1]!r}", tok[2])
    return e


# -- exact membership ------------------------------------------------------

class _Relations:
    """Per-packet-space boolean matrices for the primitive actions."""

    def __init__(self, space: PacketSpace):
        self.space = space
        n = space.size
        self.n = n
        self.eye = np.eye(n, dtype=bool)
        self.empty = np.zeros((n, n), dtype=bool)
        self._cache: Dict[Expr, np.ndarray] = {}
        self._pk = [space.packet_at(i) for i in range(n)]

    def primitive(self, e: Expr) -> np.ndarray:
        got = self._cache.get(e)
        if got is not None:
            return got
        if isinstance(e, Skip):
            m = self.eye
        elif isinstance(e, Drop):
            m = self.empty
        else:
            fi = self.space.field_index(e.field)
            m = np.zeros((self.n, self.n), dtype=bool)
            for i, pk in enumerate(self._pk):
                if isinstance(e, Test) and pk[fi] == e.value:
                    m[i, i] = True
                elif isinstance(e, TestNe) and pk[fi] != e.value:
                    m[i, i] = True
                elif isinstance(e, Assign):
                    out = pk[:fi] + (e.value,) + pk[fi + 1:]
                    m[i, self.space.index_of(out)] = True
        self._cache[e] = m
        return m


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not a.any() or not b.any():
        return np.zeros_like(a)
    return (a.astype(np.uint8) @ b.astype(np.uint8)) > 0


def _closure(a: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure by repeated squaring."""
    c = a | np.eye(a.shape[0], dtype=bool)
    while True:
        nxt = _compose(c, c)
        if (nxt == c).all():
            return c
        c = nxt


_REL_CACHE: Dict[PacketSpace, _Relations] = {}


def gs_member(e: Expr, w: Sequence[Packet], space: PacketSpace) -> bool:
    """Decide ``w in [[e]]`` exactly.

    Every sub-expression is evaluated to a relation between input and output
    packets for each contiguous window of the dup'd interior of ``w``;
    sequencing composes windows that meet, star is a closure over windows.
    """
    if len(w) < 2:
        raise ValueError("guarded strings have at least two packets")
    rel = _REL_CACHE.get(space)
    if rel is None:
        rel = _REL_CACHE.setdefault(space, _Relations(space))
    interior = [space.index_of(p) for p in w[1:-1]]
    memo: Dict[tuple, np.ndarray] = {}
    closures: Dict[tuple, np.ndarray] = {}

    def go(x: Expr, i: int, j: int) -> np.ndarray:
        key = (id(x), i, j)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(x, Dup):
            if j == i + 1:
                m = np.zeros((rel.n, rel.n), dtype=bool)
                m[interior[i], interior[i]] = True
            else:
                m = rel.empty
        elif isinstance(x, (Drop, Skip, Test, TestNe, Assign)):
            m = rel.primitive(x) if i == j else rel.empty
        elif isinstance(x, Union):
            m = go(x.left, i, j) | go(x.right, i, j)
        elif isinstance(x, Seq):
            m = rel.empty
            for k in range(i, j + 1):
                m = m | _compose(go(x.left, i, k), go(x.right, k, j))
        elif isinstance(x, Star):
            ckey = (id(x), i)
            c = closures.get(ckey)
            if c is None:
                c = closures[ckey] = _closure(go(x.body, i, i))
            rest = rel.eye.copy() if i == j else rel.empty
            for k in range(i + 1, j + 1):
                rest = rest | _compose(go(x.body, i, k), go(x, k, j))
            m = _compose(c, rest)
        else:
            raise TypeError(f"not an expression: {x!r}")
        memo[key] = m
        return m

    top = go(e, 0, len(interior))
    return bool(top[space.index_of(w[0]), space.index_of(w[-1])])
