"""Synthetic network targets and a small benchmark harness.

Switches are numbered ``1..n``.  Port 1 of every switch faces a host; links
take ports ``2, 3, ...`` in order of neighbour id, and every switch has one
spare port beyond its links, so the two-switch line is the familiar
three-port example.  Routing is shortest path on a per-destination basis.
"""
from __future__ import annotations

import csv
import io
import json
import multiprocessing as mp
import random
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .core import Assign, Expr, PacketSpace, Skip, Test, seq_all, union_all

KINDS = ("line", "ring", "star", "tree", "random")
MODES = ("transfer", "full")
CSV_HEADER = ["name", "kind", "n", "pk_size", "mode", "target_size", "learned_states",
              "mem_queries", "equiv_queries", "wall_ms", "success"]


@dataclass(frozen=True)
class Topology:
    name: str
    kind: str
    nodes: Tuple[int, ...]
    edges: FrozenSet[FrozenSet[int]]

    def neighbours(self, u: int) -> List[int]:
        return sorted(v for e in self.edges if u in e for v in e if v != u)

    def port(self, u: int, v: int) -> int:
        """Port of ``u`` facing neighbour ``v``."""
        return 2 + self.neighbours(u).index(v)

    @property
    def links(self) -> List[Tuple[int, int, int, int]]:
        """Directed links ``(u, port, v, port)``, both directions."""
        out = []
        for u in self.nodes:
            for v in self.neighbours(u):
                out.append((u, self.port(u, v), v, self.port(v, u)))
        return out

    @property
    def nports(self) -> int:
        return max(len(self.neighbours(u)) for u in self.nodes) + 2

    def hosts(self) -> Dict[int, int]:
        return {u: 1 for u in self.nodes}

    def is_connected(self) -> bool:
        seen = {self.nodes[0]}
        queue = deque(seen)
        while queue:
            u = queue.popleft()
            for v in self.neighbours(u):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self.nodes)


def _topology(name: str, kind: str, n: int, pairs) -> Topology:
    return Topology(name, kind, tuple(range(1, n + 1)), frozenset(frozenset(p) for p in pairs))


def gen_topology(kind: str, n: int, seed: int = 0) -> Topology:
    """A connected topology of the given shape on switches ``1..n``."""
    if kind not in KINDS:
        raise ValueError(f"unknown topology kind {kind!r}")
    if n < 2 or (kind == "ring" and n < 3):
        raise ValueError(f"{kind} needs more switches than {n}")
    name = f"{kind}{n}" if kind in ("line", "ring", "star") else f"{kind}{n}s{seed}"
    if kind == "line":
        pairs = [(i, i + 1) for i in range(1, n)]
    elif kind == "ring":
        pairs = [(i, i % n + 1) for i in range(1, n + 1)]
    elif kind == "star":
        pairs = [(1, i) for i in range(2, n + 1)]
    else:
        rng = random.Random(seed)
        pairs = [(rng.randint(1, i - 1), i) for i in range(2, n + 1)]
        if kind == "random":
            have = {frozenset(p) for p in pairs}
            for u in range(1, n + 1):
                for v in range(u + 1, n + 1):
                    if frozenset((u, v)) not in have and rng.random() < 0.3:
                        pairs.append((u, v))
    return _topology(name, kind, n, pairs)


def ingest_edge_list(path: str | Path, name: Optional[str] = None) -> Topology:
    """Read ``u v`` lines (``#`` starts a comment); node names are numbered by first appearance."""
    path = Path(path)
    ids: Dict[str, int] = {}
    edges = []
    seen = set()
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'u v', got {raw!r}")
        u, v = parts
        if u == v:
            raise ValueError(f"{path}:{lineno}: self loop on {u}")
        key = frozenset((u, v))
        if key in seen:
            raise ValueError(f"{path}:{lineno}: duplicate edge {u} {v}")
        seen.add(key)
        for x in (u, v):
            ids.setdefault(x, len(ids) + 1)
        edges.append((ids[u], ids[v]))
    if not edges:
        raise ValueError(f"{path}: no edges")
    topo = _topology(name or path.stem, "file", len(ids), edges)
    if not topo.is_connected():
        raise ValueError(f"{path}: topology is disconnected")
    return topo


def next_hops(topo: Topology) -> Dict[Tuple[int, int], int]:
    """Neighbour of ``u`` on a shortest path to ``d``, smallest id on ties."""
    hops = {}
    for d in topo.nodes:
        dist = {d: 0}
        queue = deque([d])
        while queue:
            u = queue.popleft()
            for v in topo.neighbours(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        if len(dist) != len(topo.nodes):
            raise ValueError(f"{topo.name} is disconnected")
        for u in topo.nodes:
            if u != d:
                hops[u, d] = min(v for v in topo.neighbours(u) if dist[v] == dist[u] - 1)
    return hops


def topology_expr(topo: Topology) -> Expr:
    """Links move packets across; host and spare ports keep them in place."""
    linked = set()
    terms = []
    for u, p, v, q in topo.links:
        linked.add((u, p))
        terms.append(seq_all([Test("sw", u), Test("pt", p), Assign("sw", v), Assign("pt", q)]))
    for u in topo.nodes:
        for p in range(1, topo.nports + 1):
            if (u, p) not in linked:
                terms.append(Test("sw", u) >> Test("pt", p))
    return union_all(terms)


def routing_expr(topo: Topology, with_dst: bool = True) -> Expr:
    if not with_dst:
        if len(topo.nodes) != 2:
            raise ValueError("routing without a destination field needs exactly two switches")
        return (Test("pt", 1) >> Assign("pt", 2)) + (Test("pt", 2) >> Assign("pt", 1))
    hops = next_hops(topo)
    terms = []
    for u in topo.nodes:
        for d in topo.nodes:
            out = 1 if u == d else topo.port(u, hops[u, d])
            terms.append(seq_all([Test("sw", u), Test("dst", d), Assign("pt", out)]))
    return union_all(terms)


@dataclass(frozen=True)
class Encoded:
    space: PacketSpace
    step: Expr
    p_i: Optional[Expr] = None
    p_f: Optional[Expr] = None


def encode_policy(topo: Topology, mode: str = "transfer", with_dst: bool = True) -> Encoded:
    """Packet space plus the one-hop program ``r ; t``, and in full mode the end predicates."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not topo.is_connected():
        raise ValueError(f"{topo.name} is disconnected")
    nodes = topo.nodes
    fields = {"sw": nodes, "pt": tuple(range(1, topo.nports + 1))}
    if with_dst:
        fields["dst"] = nodes
    space = PacketSpace.of(**fields)
    step = routing_expr(topo, with_dst) >> topology_expr(topo)
    if mode == "transfer":
        return Encoded(space, step)
    if not with_dst:
        raise ValueError("full mode needs the destination field")
    p_i = union_all(Test("sw", i) >> union_all(Test("dst", j) for j in nodes) for i in nodes)
    p_f = union_all(Test("sw", i) >> Test("dst", i) for i in nodes)
    return Encoded(space, step, p_i, p_f)


# -- running ---------------------------------------------------------------------

@dataclass
class BenchResult:
    name: str
    kind: str
    n: int
    pk_size: int
    mode: str
    target_size: int = 0
    learned_states: int = 0
    mem_queries: int = 0
    equiv_queries: int = 0
    wall_ms: int = 0
    success: bool = False

    def row(self) -> List[str]:
        d = asdict(self)
        d["success"] = int(self.success)
        return [str(d[k]) for k in CSV_HEADER]


def run_instance(topo: Topology, mode: str) -> BenchResult:
    """Build the target, learn it and report the teacher's counters."""
    from .learn_snka import learn_snka
    from .learn_spp import learn_spp
    from .spp import Store
    from .teacher import SnkaTeacher, SppTeacher, build_staged_target

    enc = encode_policy(topo, mode)
    store = Store(enc.space)
    res = BenchResult(topo.name, topo.kind, len(topo.nodes), enc.space.size, mode)
    t0 = time.perf_counter()
    if mode == "transfer":
        target = store.compile(enc.step)
        res.target_size = store.mu(target)
        teacher = SppTeacher(store, target)
        run = learn_spp(teacher)
        res.learned_states = store.size(run.result)
        res.success = store.xor(run.result, target) == 0
    else:
        target = build_staged_target(store, enc.p_i, enc.step, enc.p_f)
        res.target_size = sum(store.mu(x) for x in target.eps) + sum(
            store.mu(x) for d in target.delta for x in d.values())
        teacher = SnkaTeacher(store, target)
        run = learn_snka(teacher, audit=False)
        res.learned_states = run.result.nstates
        res.success = True
    res.wall_ms = int((time.perf_counter() - t0) * 1000)
    res.mem_queries = teacher.mem_count
    res.equiv_queries = teacher.equiv_count
    return res


def _worker(conn, topo: Topology, mode: str) -> None:
    try:
        conn.send(("ok", run_instance(topo, mode)))
    except Exception as exc:  # reported as a failed row
        conn.send(("error", repr(exc)))
    finally:
        conn.close()


@dataclass
class Instance:
    topo: Topology
    mode: str


def run_bench(instances: Sequence[Instance], timeout_s: float = 120.0, jobs: int = 1) -> List[BenchResult]:
    """Run every instance in its own process; a timeout or crash yields a failed row."""
    ctx = mp.get_context("fork")
    results: List[Optional[BenchResult]] = [None] * len(instances)
    pending = deque(enumerate(instances))
    running: Dict[int, tuple] = {}
    while pending or running:
        while pending and len(running) < max(1, jobs):
            i, inst = pending.popleft()
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_worker, args=(send, inst.topo, inst.mode), daemon=True)
            proc.start()
            send.close()
            running[i] = (proc, recv, time.perf_counter())
        for i, (proc, recv, started) in list(running.items()):
            inst = instances[i]
            elapsed = time.perf_counter() - started
            if recv.poll():
                try:
                    status, payload = recv.recv()
                except EOFError:
                    status, payload = "error", "worker died"
                proc.join()
            elif not proc.is_alive():
                status, payload = "error", f"worker exited with {proc.exitcode}"
            elif elapsed >= timeout_s:
                proc.terminate()
                proc.join()
                status, payload = "timeout", None
            else:
                continue
            if status == "ok":
                results[i] = payload
            else:
                enc = encode_policy(inst.topo, inst.mode)
                results[i] = BenchResult(inst.topo.name, inst.topo.kind, len(inst.topo.nodes),
                                         enc.space.size, inst.mode,
                                         wall_ms=int(max(elapsed, 0.0) * 1000))
            recv.close()
            del running[i]
        if running:
            time.sleep(0.005)
    return results


def write_csv(results: Sequence[BenchResult], out=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.row())
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


@dataclass
class SuiteConfig:
    """Benchmark suite as read from JSON.

    ``{"suites": [{"kind": "line", "n": [2, 3], "modes": ["transfer"], "seed": 0}],
    "edge_lists": ["net.txt"], "timeout_s": 120, "jobs": 1, "output": "out.csv"}``
    """
    instances: List[Instance] = field(default_factory=list)
    timeout_s: float = 120.0
    jobs: int = 1
    output: Optional[str] = None


def load_config(path: str | Path) -> SuiteConfig:
    path = Path(path)
    raw = json.loads(path.read_text())
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    cfg = SuiteConfig(timeout_s=float(raw.get("timeout_s", 120.0)), jobs=int(raw.get("jobs", 1)),
                      output=raw.get("output"))
    for suite in raw.get("suites", []):
        kind = suite["kind"]
        sizes = suite["n"] if isinstance(suite["n"], list) else [suite["n"]]
        modes = suite.get("modes", ["transfer"])
        for mode in modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}")
            for n in sizes:
                cfg.instances.append(Instance(gen_topology(kind, int(n), int(suite.get("seed", 0))), mode))
    for entry in raw.get("edge_lists", []):
        p = Path(entry if isinstance(entry, str) else entry["path"])
        if not p.is_absolute():
            p = path.parent / p
        modes = ["transfer"] if isinstance(entry, str) else entry.get("modes", ["transfer"])
        topo = ingest_edge_list(p)
        cfg.instances.extend(Instance(topo, m) for m in modes)
    if not cfg.instances:
        raise ValueError("config lists no instances")
    return cfg
