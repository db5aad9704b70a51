"""Learning dup-free programs as SPPs from packet-pair queries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from . import epp
from .core import Packet
from .spp import BOT
from .teacher import SppTeacher


@dataclass
class SppRun:
    result: int
    evidence: epp.Epp
    hypotheses: List[int] = field(default_factory=list)
    counterexamples: List[Tuple[Packet, Packet, bool]] = field(default_factory=list)


def learn_spp(teacher: SppTeacher, max_rounds: Optional[int] = None,
              on_round: Optional[Callable[[int, Tuple[Packet, Packet, bool]], None]] = None) -> SppRun:
    """Refine an evidence trie with labelled counterexamples until the teacher agrees.

    ``hypotheses`` records every conjecture after the initial drop.
    """
    store = teacher.store
    nfields = store.nfields
    e = epp.empty()
    h = BOT
    run = SppRun(h, e)
    c = teacher.equiv(h)
    while c is not None:
        if max_rounds is not None and len(run.counterexamples) >= max_rounds:
            raise RuntimeError(f"no convergence after {max_rounds} counterexamples")
        a, b = c
        label = teacher.mem(a, b)
        run.counterexamples.append((a, b, label))
        e = epp.update(e, a, b, label, nfields)
        h = epp.hyp_spp(store, e)
        run.hypotheses.append(h)
        if on_round is not None:
            on_round(h, (a, b, label))
        c = teacher.equiv(h)
    run.result, run.evidence = h, e
    return run
