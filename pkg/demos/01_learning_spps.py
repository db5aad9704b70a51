# %% [markdown]
# Learning a dup-free program as an SPP
#
# The teacher knows `f=1` over a single field with values 0, 1, 2. The learner
# starts from drop and generalises each batch of evidence into the smallest
# SPP it can find.

# %%
from netkat_learn import epp
from netkat_learn.core import PacketSpace, parse_expr
from netkat_learn.learn_spp import learn_spp
from netkat_learn.spp import Store
from netkat_learn.teacher import SppTeacher

space = PacketSpace.of(f=(0, 1, 2))
store = Store(space)
target = store.compile(parse_expr("f=1", space))
print(store.dump(target))

# %%
# one line per counterexample, followed by the hypothesis it produced
teacher = SppTeacher(store, target)
run = learn_spp(teacher)
for (a, b, lab), h in zip(run.counterexamples, run.hypotheses):
    print(f"{space.format_packet(a)} -> {space.format_packet(b)} labelled {int(lab)}")
    print("   ", store.dump(h).replace("\n", "\n    "))

# %%
print(epp.dump(run.evidence, space))
print("equivalence queries:", teacher.equiv_count, "membership queries:", teacher.mem_count)

# %% [markdown]
# A two-field program: everything goes to (0, 0) except (1, 2), which goes to (3, 4).

# %%
sp2 = PacketSpace.of(f=5, g=5)
st2 = Store(sp2)
t2 = st2.compile(parse_expr("(f:=0;g:=0) + (f=1;g=2;f:=3;g:=4)", sp2))
teacher2 = SppTeacher(st2, t2)
run2 = learn_spp(teacher2)
print(st2.dump(run2.result))
print("learned exactly:", run2.result == t2, "| equivalence queries:", teacher2.equiv_count,
      "of at most", sp2.size ** 2 + 1)
