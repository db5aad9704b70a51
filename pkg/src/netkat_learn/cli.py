"""Command-line front end.

Packet spaces are files of ``field <name> <size>`` (values ``0..size-1``) or
``field <name> <lo>..<hi>`` lines.  Traces are written as packets separated by
``;``, each packet as ``f=v,g=w``; a dup sits between neighbouring packets.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .core import ParseError, PacketSpace, gs_member, parse_expr

TRACE_HELP = "trace as ';'-separated packets, each 'f=v,g=w' (dups sit between packets)"


class UsageError(Exception):
    pass


def _space(path: str) -> PacketSpace:
    try:
        return PacketSpace.parse(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read packet space: {exc}") from None
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _expr(text: str, space: PacketSpace):
    try:
        return parse_expr(text, space)
    except (ParseError, KeyError, ValueError) as exc:
        raise UsageError(f"bad expression {text!r}: {exc}") from None


def cmd_eval(args) -> int:
    space = _space(args.space)
    e = _expr(args.expr, space)
    try:
        w = space.parse_trace(args.trace)
    except ParseError as exc:
        raise UsageError(f"bad trace: {exc}") from None
    print("member" if gs_member(e, w, space) else "not member")
    return 0


def cmd_learn_spp(args) -> int:
    from .learn_spp import learn_spp
    from .spp import Store
    from .teacher import SppTeacher

    space = _space(args.space)
    e = _expr(args.expr, space)
    store = Store(space)
    try:
        target = store.compile(e)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    teacher = SppTeacher(store, target)
    fmt = space.format_packet

    def on_round(h, cex):
        a, b, lab = cex
        print(f"counterexample [{fmt(a)}] -> [{fmt(b)}] : {int(lab)}")
        if args.trace:
            print(store.dump(h))

    run = learn_spp(teacher, max_rounds=args.max_rounds, on_round=on_round)
    print(store.dump(run.result))
    print(f"membership queries: {teacher.mem_count}")
    print(f"equivalence queries: {teacher.equiv_count}")
    return 0 if store.xor(run.result, target) == 0 else 1


def _staged_target(args, store):
    from .teacher import build_staged_target, split_staged

    space = store.space
    if args.expr_staged is not None:
        if any(x is not None for x in (args.pi, args.d, args.pf)):
            raise UsageError("use either --expr-staged or --pi/--d/--pf")
        try:
            p_i, d, p_f = split_staged(_expr(args.expr_staged, space))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        if args.d is None:
            raise UsageError("a target needs --expr-staged or at least --d")
        p_i = _expr(args.pi or "skip", space)
        d = _expr(args.d, space)
        p_f = _expr(args.pf or "skip", space)
    try:
        return build_staged_target(store, p_i, d, p_f)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fmt_trace(space, w) -> str:
    return space.format_trace(w) if w is not None else "none"


def cmd_learn_pnka(args) -> int:
    from .learn_pnka import learn_pnka
    from .spp import Store
    from .teacher import SnkaTeacher

    space = _space(args.space)
    store = Store(space)
    teacher = SnkaTeacher(store, _staged_target(args, store))

    def on_iteration(table, h, c):
        print(f"conjecture states={h.nstates} counterexample {_fmt_trace(space, c)}")
        if args.trace:
            print(table.dump())

    run = learn_pnka(teacher, max_rounds=args.max_rounds, on_iteration=on_iteration)
    print(run.result.dump())
    print(f"conjectures: {run.conjectures}")
    print(f"membership queries: {teacher.mem_count}")
    print(f"equivalence queries: {teacher.equiv_count}")
    return 0


def cmd_learn_snka(args) -> int:
    from .learn_snka import learn_snka
    from .spp import Store
    from .teacher import SnkaTeacher

    space = _space(args.space)
    store = Store(space)
    teacher = SnkaTeacher(store, _staged_target(args, store))

    def on_iteration(table, h, c):
        print(f"conjecture states={h.nstates} counterexample {_fmt_trace(space, c)}")
        if args.trace:
            rows, ns, ne = table.size()
            print(f"  tables={len(table.tables)} rows={rows} prefixes={ns} suffixes={ne}")

    run = learn_snka(teacher, max_rounds=args.max_rounds, on_iteration=on_iteration)
    print(run.result.dump())
    print(f"conjectures: {run.conjectures}")
    print(f"membership queries: {teacher.mem_count}")
    print(f"equivalence queries: {teacher.equiv_count}")
    return 0


def cmd_bench(args) -> int:
    from .bench import load_config, run_bench, write_csv

    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"bad bench config: {exc}") from None
    timeout = cfg.timeout_s if args.timeout is None else args.timeout
    jobs = cfg.jobs if args.jobs is None else args.jobs
    results = run_bench(cfg.instances, timeout_s=timeout, jobs=jobs)
    out = args.out or cfg.output
    if out is not None and not Path(out).is_absolute() and args.out is None:
        out = str(Path(args.config).parent / out)
    text = write_csv(results, out)
    if out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(results)} rows to {out}")
    return 0 if all(r.success for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netkat-learn", description="Active learning of NetKAT programs and automata.",
                                epilog=TRACE_HELP)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="decide whether a trace is in an expression's language")
    e.add_argument("space")
    e.add_argument("expr")
    e.add_argument("trace", help=TRACE_HELP)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("learn-spp", help="learn a dup-free expression as an SPP")
    s.add_argument("space")
    s.add_argument("expr")
    s.add_argument("--trace", action="store_true", help="print every hypothesis")
    s.add_argument("--max-rounds", type=int, default=100_000)
    s.set_defaults(func=cmd_learn_spp)

    for name, func, what in (("learn-pnka", cmd_learn_pnka, "the canonical packet-state automaton"),
                             ("learn-snka", cmd_learn_snka, "a symbolic automaton")):
        a = sub.add_parser(name, help=f"learn {what} for p_i;(d;dup)*;p_f")
        a.add_argument("space")
        a.add_argument("--pi", help="initial predicate (default skip)")
        a.add_argument("--d", help="dup-free step program")
        a.add_argument("--pf", help="final predicate (default skip)")
        a.add_argument("--expr-staged", help="whole expression of the form p_i;(d;dup)*;p_f")
        a.add_argument("--trace", action="store_true", help="dump tables after each conjecture")
        a.add_argument("--max-rounds", type=int, default=1000)
        a.set_defaults(func=func)

    b = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    b.add_argument("config", help="JSON suite description")
    b.add_argument("--jobs", type=int, default=None)
    b.add_argument("--timeout", type=float, default=None, help="seconds per instance")
    b.add_argument("--out", help="CSV path (default: config's output, else stdout)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, AssertionError) as exc:
        print(f"learner failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
