"""Combinatorial lower bound from the (k+b)-core and a greedy incumbent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cascade import Instance, survivors_mask
from .graph import peel


@dataclass(frozen=True)
class BoundInfo:
    m: int
    h: int
    hcore_size: int
    tightened_T: int

    def to_json(self) -> dict:
        return {"m": self.m, "h": self.h, "hcore_size": self.hcore_size,
                "tightened_T": self.tightened_T}


def lower_bound_m(inst: Instance, alive: np.ndarray | None = None, budget: int | None = None) -> BoundInfo:
    """Removing any b nodes from the (k+b)-core leaves a k-subcore, so
    ``|(k+b)-core| - b`` survivors are guaranteed.

    ``alive``/``budget`` evaluate the same bound on a residual graph.
    """
    b = inst.b if budget is None else budget
    h = inst.k + b
    size = int(peel(inst.graph, h, alive).sum())
    m = max(0, size - b)
    n = inst.n if alive is None else int(alive.sum())
    return BoundInfo(m=m, h=h, hcore_size=size, tightened_T=max(0, n - b - m))


def _best_single_removal(inst: Instance, alive: np.ndarray) -> tuple[int, np.ndarray]:
    best_u, best_mask, best_lost = -1, alive, -1
    for u in np.flatnonzero(alive):
        u = int(u)
        a = alive.copy()
        a[u] = False
        mask = peel(inst.graph, inst.k, a)
        lost = int(alive.sum() - mask.sum())
        if lost > best_lost:
            best_u, best_mask, best_lost = u, mask, lost
    return best_u, best_mask


def greedy_upper_bound(inst: Instance) -> tuple[frozenset[int], int]:
    """b rounds of removing the surviving node with the most followers in the
    current residual k-core (lowest id on ties)."""
    inst.require_preprocessed()
    if inst.b < 1:
        raise ValueError("greedy needs a budget of at least one node")
    if inst.b > inst.n:
        raise ValueError(f"budget {inst.b} exceeds {inst.n} nodes")
    alive = np.ones(inst.n, dtype=bool)
    picked: list[int] = []
    for _ in range(inst.b):
        if not alive.any():
            break
        u, alive = _best_single_removal(inst, alive)
        picked.append(u)
    # network emptied early: spend the rest of the budget on the lowest ids
    filler = (v for v in range(inst.n) if v not in picked)
    while len(picked) < inst.b:
        picked.append(next(filler))
    w = frozenset(picked)
    return w, int(survivors_mask(inst, w).sum())
