"""Exact methods for the Collapsed k-Core Problem.

Three routes to the same optimum:

* ``brute_force`` scores every b-subset (the oracle);
* ``branch_and_bound`` searches include/exclude decisions with the
  (k+r)-core bound on the residual graph;
* ``cutting_plane`` solves the sparse master ``min z`` over a growing pool
  of BigM, no-good, h-core and follower cuts separated on integer points.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from math import comb, lcm

import numpy as np

from .bounds import greedy_upper_bound, lower_bound_m
from .cascade import Instance, collapsed_size, followers_set, followers_table, survivors_mask
from .inequalities import (
    CutPool, Kind, bigm_cut, dominance_cuts, follower_cuts, followers_assumption,
    general_follower_cut, hcore_cut, hcore_of, nogood_cut, symmetry_cuts,
)

log = logging.getLogger(__name__)

OPTIMAL, FEASIBLE, INFEASIBLE = "Optimal", "Feasible", "Infeasible"
METHODS = ("brute", "bnb", "cutting-plane")


@dataclass
class SolverConfig:
    method: str = "bnb"
    u_threshold: int = 10
    ell_offset: int = 2
    time_limit: float | None = None
    use_dominance: bool = True
    use_symmetry: bool = True
    use_followers: bool = True
    # exact check that fewer than b removals cannot empty the network
    exact_precondition: bool = True
    brute_cap: int = 10**7
    master_cap: int = 2 * 10**6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; pick one of {METHODS}")
        if self.u_threshold < 0:
            raise ValueError("u_threshold must be nonnegative")
        if self.ell_offset < 0:
            raise ValueError("ell_offset must be nonnegative")


@dataclass
class SolverResult:
    best_w: frozenset[int]
    best_value: int
    proven_lb: int
    status: str
    nodes_explored: int = 0
    cuts_added: dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0
    master_values: list[int] = field(default_factory=list)
    followers_used: bool = False
    # cuts generated by the cutting-plane loop
    pool: CutPool | None = field(default=None, repr=False, compare=False)

    @property
    def gap_pct(self) -> float:
        if self.best_value <= 0:
            return 0.0
        return 100.0 * (self.best_value - self.proven_lb) / self.best_value

    def to_json(self) -> dict:
        return {
            "value": self.best_value,
            "lb": self.proven_lb,
            "set": sorted(self.best_w),
            "status": self.status,
            "nodes": self.nodes_explored,
            "cuts": dict(self.cuts_added),
            "time": round(self.wall_time, 6),
        }


class _Clock:
    def __init__(self, limit):
        self.start = time.perf_counter()
        self.limit = limit

    def expired(self) -> bool:
        return self.limit is not None and time.perf_counter() - self.start > self.limit

    def elapsed(self) -> float:
        return time.perf_counter() - self.start


def _infeasible(inst: Instance, clock: _Clock) -> SolverResult:
    return SolverResult(frozenset(), 0, 0, INFEASIBLE, wall_time=clock.elapsed())


def brute_force(inst: Instance, cap: int = 10**7) -> SolverResult:
    """Score every b-subset; ties go to the lexicographically first set."""
    clock = _Clock(None)
    if inst.b > inst.n:
        return _infeasible(inst, clock)
    total = comb(inst.n, inst.b)
    if total > cap:
        raise ValueError(f"C({inst.n},{inst.b}) = {total} subsets exceeds the cap {cap}")
    best_w, best = None, None
    for w in combinations(range(inst.n), inst.b):
        v = collapsed_size(inst, w)
        if best is None or v < best:
            best_w, best = w, v
            if v == 0:
                break
    return SolverResult(frozenset(best_w), best, best, OPTIMAL, nodes_explored=total,
                        wall_time=clock.elapsed())


def _use_followers(inst: Instance, cfg: SolverConfig) -> bool:
    return cfg.use_followers and followers_assumption(inst, exact=cfg.exact_precondition)


def branch_and_bound(inst: Instance, cfg: SolverConfig | None = None,
                     target: int | None = None) -> SolverResult:
    """Depth-first include/exclude search over candidate collapsers.

    Candidates are ordered by decreasing follower count. A node with chosen
    set P and residual budget r is bounded below by the (k+r)-core bound of
    the residual k-core. Dominance, symmetry and follower cuts act as
    branching filters. ``target`` stops the search as soon as an incumbent
    of at most that value is known.
    """
    cfg = cfg or SolverConfig()
    clock = _Clock(cfg.time_limit)
    inst.require_preprocessed()
    n, b = inst.n, inst.b
    if b > n:
        return _infeasible(inst, clock)

    root_bound = lower_bound_m(inst).m
    if b == 0:
        v = n
        return SolverResult(frozenset(), v, v, OPTIMAL, 1, wall_time=clock.elapsed())

    table = followers_table(inst)
    order = sorted(range(n), key=lambda u: (-len(table[u]), u))
    use_fol = _use_followers(inst, cfg)
    filtered = cfg.use_dominance or cfg.use_symmetry or use_fol

    dominators: list[list[int]] = [[] for _ in range(n)]
    if cfg.use_dominance:
        for c in dominance_cuts(table):
            i, j = c.provenance
            dominators[i].append(j)
    sym_prev: list[int | None] = [None] * n
    if cfg.use_symmetry:
        for c in symmetry_cuts(table):
            a, b_ = c.provenance
            sym_prev[b_] = a
    member_of: list[list[int]] = [[] for _ in range(n)]
    if use_fol:
        for u, J in enumerate(table):
            for x in J:
                member_of[x].append(u)

    def allowed(x: int, chosen: frozenset[int]) -> bool:
        if any(j not in chosen for j in dominators[x]):
            return False
        p = sym_prev[x]
        if p is not None and p not in chosen:
            return False
        for u in member_of[x]:
            if not chosen.isdisjoint(table[u]):
                return False
        return True

    best_w, best = greedy_upper_bound(inst)
    nodes = 0
    full = np.ones(n, dtype=bool)
    # frame: (position in order, chosen set, alive mask, bound of the parent)
    stack = [(0, frozenset(), full, root_bound)]
    timed_out = False
    while stack:
        if best <= root_bound or (target is not None and best <= target):
            stack.clear()
            break
        if clock.expired():
            timed_out = True
            break
        pos, chosen, alive, parent_bound = stack.pop()
        if parent_bound >= best:
            continue
        nodes += 1
        r = b - len(chosen)
        size = int(alive.sum())
        if r == 0:
            if size < best:
                best, best_w = size, chosen
            continue
        if size <= r:
            # the residual core can be wiped out entirely
            rest = [v for v in range(n) if v not in chosen and alive[v]]
            rest += [v for v in range(n) if v not in chosen and not alive[v]]
            best, best_w = 0, chosen | frozenset(rest[:r])
            continue
        bound = max(root_bound, lower_bound_m(inst, alive, r).m)
        if bound >= best:
            continue
        # next admissible candidate
        left = []
        for q in range(pos, n):
            x = order[q]
            if not filtered and not alive[x]:
                continue
            if filtered and not allowed(x, chosen):
                continue
            left.append(q)
            if len(left) >= r:
                break
        if len(left) < r:
            continue
        q = left[0]
        x = order[q]
        stack.append((q + 1, chosen, alive, bound))
        child = alive.copy()
        child[x] = False
        stack.append((q + 1, chosen | {x}, survivors_mask(inst, (), child), bound))

    if timed_out:
        pending = min((f[3] for f in stack), default=best)
        lb = min(best, max(root_bound, pending))
        status = OPTIMAL if lb >= best else FEASIBLE
    else:
        lb, status = best, OPTIMAL
    return SolverResult(frozenset(best_w), best, lb if status == FEASIBLE else best, status,
                        nodes_explored=nodes, wall_time=clock.elapsed(), followers_used=use_fol)


class _Master:
    """Sparse master ``min z`` solved by scoring every b-subset.

    Each subset carries its current lower bound on z (max over cuts) and a
    feasibility flag from the pure w-cuts; both are kept in exact integers.
    """

    def __init__(self, n: int, b: int, m: int):
        self.combos = np.array(list(combinations(range(n), b)), dtype=np.int64).reshape(-1, b)
        self.n = n
        self.zbound = np.full(len(self.combos), m, dtype=np.int64)
        self.feasible = np.ones(len(self.combos), dtype=bool)

    def _sums(self, coeffs: dict[int, int]) -> np.ndarray:
        a = np.zeros(self.n, dtype=np.int64)
        for i, c in coeffs.items():
            a[i] = c
        return a[self.combos].sum(axis=1)

    def add(self, cut):
        den = lcm(*(c.denominator for c in cut.coeffs.values()), cut.rhs.denominator)
        coeffs = {i: int(c * den) for i, c in cut.coeffs.items()}
        rhs = int(cut.rhs * den)
        s = self._sums(coeffs)
        if cut.z_coeff:
            # den * z >= rhs - s  with z_coeff == 1
            implied = -((s - rhs) // den)
            np.maximum(self.zbound, implied, out=self.zbound)
        elif cut.sense == ">=":
            self.feasible &= s >= rhs
        else:
            self.feasible &= s <= rhs

    def solve(self) -> tuple[int, tuple[int, ...]]:
        if not self.feasible.any():
            raise RuntimeError("master has no feasible interdiction set")
        masked = np.where(self.feasible, self.zbound, np.iinfo(np.int64).max)
        idx = int(np.argmin(masked))
        return int(masked[idx]), tuple(int(v) for v in self.combos[idx])


def cutting_plane(inst: Instance, cfg: SolverConfig | None = None) -> SolverResult:
    """Cutting-plane loop over the sparse master with integer-point separation.

    Each master optimum (w, z) is checked by a direct cascade; violated
    follower, BigM, no-good and h-core cuts are added until the master value
    meets the best cascade value.
    """
    cfg = cfg or SolverConfig(method="cutting-plane")
    clock = _Clock(cfg.time_limit)
    inst.require_preprocessed()
    n, b, k = inst.n, inst.b, inst.k
    if b > n:
        return _infeasible(inst, clock)
    total = comb(n, b)
    if total > cfg.master_cap:
        raise ValueError(f"master enumeration of C({n},{b}) = {total} sets exceeds {cfg.master_cap}")

    m = lower_bound_m(inst).m
    table = followers_table(inst)
    use_fol = _use_followers(inst, cfg)
    pool = CutPool()
    master = _Master(n, b, m)

    def add(cut) -> bool:
        if pool.add(cut):
            master.add(cut)
            return True
        return False

    if use_fol:
        for c in follower_cuts(inst, table, assumption=True):
            add(c)
    if cfg.use_dominance:
        for c in dominance_cuts(table):
            add(c)
    if cfg.use_symmetry:
        for c in symmetry_cuts(table):
            add(c)

    if b >= 1:
        best_w, best = greedy_upper_bound(inst)
    else:
        best_w, best = frozenset(), n
    master_values: list[int] = []
    status = FEASIBLE
    lb = m
    iterations = 0
    while True:
        if clock.expired():
            break
        z_hat, w_hat = master.solve()
        iterations += 1
        master_values.append(z_hat)
        lb = max(lb, z_hat)
        c = collapsed_size(inst, w_hat)
        if c < best:
            best, best_w = c, frozenset(w_hat)
        if z_hat >= best:
            status = OPTIMAL
            break

        before = len(pool)
        added = 0
        # collapsers that already follow the others
        if use_fol and b >= 2:
            for j in w_hat:
                s = [v for v in w_hat if v != j]
                if j in followers_set(inst, s):
                    try:
                        added += add(general_follower_cut(inst, s))
                    except ValueError:
                        pass
        # Benders-like and no-good cuts at the candidate
        if not added and z_hat < c:
            K = survivors_mask(inst, w_hat)
            add(bigm_cut(inst, np.flatnonzero(K), m))
            add(nogood_cut(inst, w_hat, m))
        # shrink the core one node at a time
        involvement = pool.involvement(n)
        removed = list(w_hat)
        core = survivors_mask(inst, removed)
        U = 0
        while U < cfg.u_threshold and core.any():
            cand = np.flatnonzero(core)
            u = int(max(cand, key=lambda v: (involvement[v], -v)))
            removed.append(u)
            U += 1
            core = survivors_mask(inst, removed)
            size = int(core.sum())
            if size > m and z_hat < size:
                cut = bigm_cut(inst, np.flatnonzero(core), m)
                if add(cut):
                    for i in cut.coeffs:
                        involvement[i] += 1
            else:
                break
        # cuts from the h-cores of the residual graph
        for h in range(k + 1, k + cfg.ell_offset + 1):
            K = hcore_of(inst, w_hat, h)
            if K and len(K) >= m and len(K) - h + k >= m:
                add(hcore_cut(inst, K, h, m))

        if len(pool) == before:
            raise RuntimeError(f"separation produced no new cut at {w_hat}")

    if status == OPTIMAL:
        lb = best
    counts = pool.counts()
    return SolverResult(frozenset(best_w), best, min(lb, best), status,
                        nodes_explored=iterations, cuts_added=counts,
                        wall_time=clock.elapsed(), master_values=master_values,
                        followers_used=use_fol, pool=pool)


def solve(inst: Instance, cfg: SolverConfig | None = None) -> SolverResult:
    cfg = cfg or SolverConfig()
    if cfg.method == "brute":
        return brute_force(inst, cfg.brute_cap)
    if cfg.method == "bnb":
        return branch_and_bound(inst, cfg)
    return cutting_plane(inst, cfg)
