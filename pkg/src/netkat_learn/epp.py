"""Evidence packet programs: exact tries of labelled packet pairs.

An EPP node for field ``f`` maps an input value to a map from output value to
the sub-trie for the next field; every path visits every field, and the
leaves are the labels ``True``/``False`` handed out by membership queries.
EPPs are persistent: :func:`update` copies the path it touches.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union as TUnion

from .core import Packet, PacketSpace
from .spp import BOT, TOP, Store


class TeacherContradiction(RuntimeError):
    """A pair was labelled both 1 and 0: the oracle is inconsistent."""


class EppNode:
    __slots__ = ("level", "children")

    def __init__(self, level: int, children: Mapping[int, Mapping[int, "Epp"]]):
        self.level = level
        self.children = children

    def __repr__(self):
        return f"EppNode({self.level}, {dict((k, dict(v)) for k, v in self.children.items())})"

    def __eq__(self, other):
        return (isinstance(other, EppNode) and self.level == other.level
                and {k: dict(v) for k, v in self.children.items()}
                == {k: dict(v) for k, v in other.children.items()})

    def __hash__(self):
        return hash((self.level, len(self.children)))

    def keys(self):
        return sorted(self.children)


Epp = TUnion[bool, EppNode]


def empty() -> EppNode:
    """The EPP holding no evidence."""
    return EppNode(0, {})


def evaluate(e: Epp, a: Packet, b: Packet) -> Optional[bool]:
    """Label of ``(a, b)``, or None when the pair is not in the trie."""
    while isinstance(e, EppNode):
        row = e.children.get(a[e.level])
        if row is None:
            return None
        e = row.get(b[e.level])
        if e is None:
            return None
    return e


def update(e: Epp, a: Packet, b: Packet, label: bool, nfields: int | None = None) -> Epp:
    """Return a copy of ``e`` that also labels ``(a, b)``."""
    label = bool(label)
    nfields = len(a) if nfields is None else nfields

    def go(node: Optional[Epp], lvl: int) -> Epp:
        if lvl == nfields:
            if node is not None and node != label:
                raise TeacherContradiction(f"pair {a}->{b} relabelled {node} -> {label}")
            return label
        if node is None:
            node = EppNode(lvl, {})
        row = dict(node.children.get(a[lvl], {}))
        row[b[lvl]] = go(row.get(b[lvl]), lvl + 1)
        children = dict(node.children)
        children[a[lvl]] = row
        return EppNode(lvl, children)

    if isinstance(e, bool):
        if nfields != 0:
            raise ValueError("leaf EPPs only exist over zero fields")
        return go(e, 0)
    return go(e, e.level)


def items(e: Epp) -> Iterator[Tuple[Packet, Packet, bool]]:
    """Every labelled pair in the trie."""
    if isinstance(e, bool):
        yield (), (), e
        return
    for v in sorted(e.children):
        for w in sorted(e.children[v]):
            for a, b, lab in items(e.children[v][w]):
                yield (v,) + a, (w,) + b, lab


def from_items(pairs, nfields: int) -> Epp:
    e: Epp = empty()
    for a, b, lab in pairs:
        e = update(e, a, b, lab, nfields)
    return e


def is_empty(e: Epp) -> bool:
    return isinstance(e, EppNode) and not e.children


def dump(e: Epp, space: PacketSpace) -> str:
    lines = [f"{space.format_packet(a)} -> {space.format_packet(b)} : {int(lab)}" for a, b, lab in items(e)]
    return "\n".join(lines) if lines else "(empty)"


# -- generalisation to SPPs ------------------------------------------------

def select(store: Store, e: EppNode, v: int, hyp: Dict[int, int]) -> int:
    """The SPP obtained by letting the bindings of ``v`` stand for every untested value."""
    b = {v1: {v2: hyp[id(sub)] for v2, sub in row.items()}
         for v1, row in e.children.items() if v1 != v}
    row_v = e.children.get(v, {})
    m = {v2: hyp[id(sub)] for v2, sub in row_v.items() if v2 != v}
    d = hyp[id(row_v[v])] if v in row_v else BOT
    return store.mk_node(e.level, b, m, d)


def hyp_spp(store: Store, e: Epp) -> int:
    """Generalise evidence bottom-up, keeping the smallest (by ``mu``) candidate per node.

    Candidates tie-break towards the smallest value.  The empty trie yields drop.
    """
    hyp: Dict[int, int] = {}

    def go(x: Epp) -> int:
        key = id(x)
        if key in hyp:
            return hyp[key]
        if isinstance(x, bool):
            out = TOP if x else BOT
        elif not x.children:
            out = BOT
        else:
            for row in x.children.values():
                for sub in row.values():
                    go(sub)
            best = None
            for v in sorted(x.children):
                cand = select(store, x, v, hyp)
                size = store.mu(cand)
                if best is None or size < best[0]:
                    best = (size, cand)
            out = best[1]
        hyp[key] = out
        return out

    return go(e)


# -- hardness instances ----------------------------------------------------

@dataclass(frozen=True)
class HardnessInstance:
    space: PacketSpace
    epp: Epp
    vertex_value: Mapping[object, int]
    pair_value: Mapping[frozenset, int]
    edges: frozenset


def gadget(positive: bool) -> EppNode:
    """Second-field gadget: ``1 -> 2`` labelled ``positive``, ``2 -> 1`` the opposite."""
    return EppNode(1, {1: {2: positive}, 2: {1: not positive}})


def to_epp_hardness(vertices: Sequence, edges) -> HardnessInstance:
    """Encode an undirected graph as a two-field EPP.

    Values 1 and 2 drive the gadgets; every vertex and every unordered vertex
    pair gets its own value.  For a non-edge both orientations carry the
    positive gadget; for an edge ``{u, v}`` with ``u`` listed first only the
    ``u`` side does.
    """
    vertices = list(vertices)
    if len(set(vertices)) != len(vertices):
        raise ValueError("duplicate vertex")
    edge_set = frozenset(frozenset(e) for e in edges)
    for e in edge_set:
        if len(e) != 2 or not e <= set(vertices):
            raise ValueError(f"bad edge {set(e)}")
    vertex_value = {v: 3 + i for i, v in enumerate(vertices)}
    pair_value = {}
    nxt = 3 + len(vertices)
    for u, v in itertools.combinations(vertices, 2):
        pair_value[frozenset((u, v))] = nxt
        nxt += 1
    domain = tuple(range(1, nxt))
    space = PacketSpace(("f1", "f2"), (domain, domain))
    order = {v: i for i, v in enumerate(vertices)}
    children = {}
    for v1 in vertices:
        row = {}
        for v2 in vertices:
            if v1 == v2:
                continue
            pair = frozenset((v1, v2))
            positive = pair not in edge_set or order[v1] < order[v2]
            row[pair_value[pair]] = gadget(positive)
        if row:
            children[vertex_value[v1]] = row
    return HardnessInstance(space, EppNode(0, children), vertex_value, pair_value, edge_set)
