"""The detection LP is integral, and its dual closes the bilevel gap.

For an interdiction set W the LP  min sum u  over the k-core constraints
returns exactly the nodes that leave; its dual reaches the same value,
which is what lets the follower problem be replaced by dual constraints.
"""

import numpy as np

from collapsed_kcore import Instance, preprocess, solve
from collapsed_kcore.datasets import load
from collapsed_kcore.emit import dual_assignment, emit_nonlinear_dual, evaluate_model
from collapsed_kcore.lp import (build_detection_lp, build_dual, min_lambda_cap, simplex_solve,
                                verify_integrality)

inst = preprocess(Instance(load("karate"), 2, 2))
best = solve(inst)
w = np.array([int(i in best.best_w)
              for i in range(inst.n)])

primal = simplex_solve(build_detection_lp(inst.graph, inst.k, w))
print(f"primal: status {primal.status}, sum u = {primal.objective:.6f}, "
      f"{primal.iterations} pivots, integral: {verify_integrality(primal)}")
print(f"nodes leaving per the cascade: {inst.n - best.best_value}")

dual = simplex_solve(build_dual(inst.graph, inst.k, w))
print(f"dual:   status {dual.status}, objective {dual.objective:.6f}")
print(f"largest lambda a capped dual needs here: {min_lambda_cap(inst.graph, inst.k, w):.3f}"
      f" (cap used by the linearized model: {inst.n})")

for linearize in (False, True):
    model = emit_nonlinear_dual(inst, linearize=linearize)
    check = evaluate_model(model, dual_assignment(inst, best.best_w, linearize=linearize))
    kind = "linearized" if linearize else "bilinear"
    print(f"{kind} dual model at W*: feasible={check['feasible']}, n - v = {check['objective']}")
