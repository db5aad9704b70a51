# %% [markdown]
# Learning a symbolic automaton for a two-switch network
#
# Packets carry a switch and a port. Routing swaps ports 1 and 2, port 2 is
# the link between the switches, and we watch packets that enter at switch 1
# port 1 and leave at switch 2 port 1.

# %%
from netkat_learn.automata import enumerate_lang
from netkat_learn.core import PacketSpace, parse_expr
from netkat_learn.learn_snka import learn_snka
from netkat_learn.spp import Store
from netkat_learn.teacher import SnkaTeacher, build_staged_target, split_staged

space = PacketSpace.of(sw=(1, 2), pt=(1, 2, 3))
expr = parse_expr("sw=1;pt=1;((pt=1;pt:=2 + pt=2;pt:=1);"
                  "(pt=1 + pt=3 + pt=2;(sw=1;sw:=2 + sw=2;sw:=1));dup)*;sw=2;pt=1", space)
store = Store(space)
target = build_staged_target(store, *split_staged(expr))
for w in sorted(enumerate_lang(target, 3)):
    print(space.format_trace(w))

# %%
teacher = SnkaTeacher(store, target)


def show(table, h, c):
    rows, ns, ne = table.size()
    cex = space.format_trace(c) if c else "none"
    print(f"states={h.nstates:<2} rows={rows:<3} prefixes={ns:<3} suffixes={ne:<3} counterexample {cex}")


run = learn_snka(teacher, on_iteration=show)

# %%
print(run.result.dump())
print("conjectures:", run.conjectures, "membership queries:", run.mem_queries)
