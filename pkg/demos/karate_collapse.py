"""Which members of Zachary's karate club should leave to shrink its 2-core most?

Walks through preprocessing, the (k+b)-core bound, the greedy incumbent and
the three exact methods, then replays the winning cascade round by round.
"""

from collapsed_kcore import (Instance, SolverConfig, collapse, core_decomposition,
                             greedy_upper_bound, lower_bound_m, preprocess, solve)
from collapsed_kcore.datasets import load

g = load("karate")
dec = core_decomposition(g)
print(f"karate: {g.n} members, {g.m} ties, degeneracy {dec.max_coreness}")
print("layer sizes by coreness:", [len(layer) for layer in dec.layers])

K = 2
for b in (1, 2, 3):
    inst = preprocess(Instance(g, K, b))
    info = lower_bound_m(inst)
    _, greedy = greedy_upper_bound(inst)
    print(f"\nb={b}: {inst.n} nodes after preprocessing, bound m={info.m}, greedy {greedy}")
    for method in ("brute", "bnb", "cutting-plane"):
        res = solve(inst, SolverConfig(method=method))
        who = inst.graph.label_of(res.best_w)
        print(f"  {method:>13}: core of {res.best_value} left after removing {who} "
              f"({res.wall_time:.2f} s)")

# the cascade behind the b=3 optimum
inst = preprocess(Instance(g, K, 3))
res = solve(inst)
trace = collapse(inst, res.best_w)
print(f"\nremoving {inst.graph.label_of(res.best_w)}:")
for t in range(1, trace.rounds + 1):
    print(f"  round {t}: {inst.graph.label_of(trace.leaving(t))} drop below {K} ties")
print(f"  {len(trace.survivors)} members remain")
