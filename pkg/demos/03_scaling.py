# %% [markdown]
# Query counts on line and ring networks
#
# Transfer mode learns the one-hop program as an SPP; full mode learns the
# whole path language as a symbolic automaton.

# %%
import os

import numpy as np

from netkat_learn.bench import Instance, gen_topology, run_bench, write_csv

insts = [Instance(gen_topology(kind, n), mode)
         for kind in ("line", "ring") for mode in ("transfer", "full") for n in range(3, 7)]
results = run_bench(insts, timeout_s=120, jobs=os.cpu_count() or 1)
print(write_csv(results))

# %%
# membership queries per packet for each suite
for kind in ("line", "ring"):
    for mode in ("transfer", "full"):
        rs = [r for r in results if r.kind == kind and r.mode == mode]
        per = np.array([r.mem_queries / r.pk_size for r in rs])
        print(f"{kind:5} {mode:8}", np.round(per, 2))
