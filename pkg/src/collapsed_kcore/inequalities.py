"""Valid inequalities over the interdiction variables ``w`` and the
surviving-core size ``z``.

Every cut is stored in the canonical linear form

    sum_i coeffs[i] * w_i + z_coeff * z  (>= or <=)  rhs

with exact rational coefficients.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Mapping, Sequence

from .cascade import Instance, followers_set, survivors_mask
from .graph import min_degree_of, peel

log = logging.getLogger(__name__)


class Kind(str, enum.Enum):
    DOMINANCE = "Dominance"
    SYMMETRY = "Symmetry"
    FOLLOWER = "Follower"
    GENERAL_FOLLOWER = "GeneralFollower"
    BIGM = "BigM"
    NOGOOD = "NoGood"
    HCORE = "HCore"

    @property
    def prunes(self) -> bool:
        """Pure w-constraints that restrict the leader's choices."""
        return self in (Kind.DOMINANCE, Kind.SYMMETRY, Kind.FOLLOWER, Kind.GENERAL_FOLLOWER)


GE, LE = ">=", "<="


@dataclass(frozen=True)
class Cut:
    kind: Kind
    coeffs: Mapping[int, Fraction]
    z_coeff: int
    rhs: Fraction
    sense: str
    provenance: tuple = ()

    @property
    def nodes(self) -> list[int]:
        return sorted(self.coeffs)

    @property
    def key(self) -> tuple:
        return (self.kind, self.provenance)

    def lhs(self, w: Sequence[int], z: int = 0) -> Fraction:
        total = Fraction(self.z_coeff * z)
        for i, a in self.coeffs.items():
            if w[i]:
                total += a * w[i]
        return total

    def implied_z(self, w: Sequence[int]) -> int | None:
        """Smallest integer z allowed at ``w`` by a z-cut (``None`` for pure
        w-cuts)."""
        if not self.z_coeff:
            return None
        return ceil((self.rhs - self.lhs(w)) / self.z_coeff)

    def to_json(self) -> dict:
        def num(x):
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else str(x)
        return {
            "kind": self.kind.value,
            "nodes": self.nodes,
            "coeffs": [num(self.coeffs[i]) for i in self.nodes],
            "z_coeff": self.z_coeff,
            "rhs": num(self.rhs),
            "sense": self.sense,
        }


def evaluate(cut: Cut, w: Sequence[int], z: int = 0) -> bool:
    """Exact satisfaction test of ``cut`` at the point (w, z)."""
    lhs = cut.lhs(w, z)
    return lhs >= cut.rhs if cut.sense == GE else lhs <= cut.rhs


class CutList(list):
    """A list of cuts with a flag telling whether generation was suppressed."""

    suppressed: bool = False


@dataclass
class CutPool:
    """Append-only cut store, deduplicated by (kind, provenance)."""

    cuts: list[Cut] = field(default_factory=list)
    _keys: set = field(default_factory=set, repr=False)

    def add(self, cut: Cut) -> bool:
        if cut.key in self._keys:
            return False
        self._keys.add(cut.key)
        self.cuts.append(cut)
        return True

    def extend(self, cuts: Iterable[Cut]) -> int:
        return sum(self.add(c) for c in cuts)

    def counts(self) -> dict[str, int]:
        out = {k.value: 0 for k in Kind}
        for c in self.cuts:
            out[c.kind.value] += 1
        return out

    def involvement(self, n: int) -> list[int]:
        cnt = [0] * n
        for c in self.cuts:
            for i in c.coeffs:
                cnt[i] += 1
        return cnt

    def __len__(self):
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)


ONE = Fraction(1)


def _sum_cut(kind, nodes, coeff, z_coeff, rhs, sense, provenance) -> Cut:
    coeff = Fraction(coeff)
    return Cut(kind, {int(i): coeff for i in sorted(nodes)}, z_coeff, Fraction(rhs), sense,
               provenance)


def dominance_cuts(table: Sequence[frozenset[int]]) -> list[Cut]:
    """``w_j >= w_i`` whenever ``J_i`` is a strict subset of ``J_j``;
    candidates ``i`` are taken from ``J_j`` only."""
    cuts = []
    for j, Jj in enumerate(table):
        for i in sorted(Jj):
            if i != j and table[i] < Jj:
                cuts.append(Cut(Kind.DOMINANCE, {j: ONE, i: -ONE}, 0, Fraction(0), GE, (i, j)))
    return cuts


def follower_classes(table: Sequence[frozenset[int]]) -> list[list[int]]:
    """Partition of the nodes by identical follower sets, ascending ids."""
    classes: dict[frozenset[int], list[int]] = {}
    for v, J in enumerate(table):
        classes.setdefault(J, []).append(v)
    return list(classes.values())


def symmetry_cuts(table: Sequence[frozenset[int]]) -> list[Cut]:
    """Chain ``w_{i1} >= w_{i2} >= ...`` over each class of nodes sharing
    their follower set."""
    cuts = []
    for cls in follower_classes(table):
        for a, b in zip(cls, cls[1:]):
            cuts.append(Cut(Kind.SYMMETRY, {a: ONE, b: -ONE}, 0, Fraction(0), GE, (a, b)))
    return cuts


def greedy_can_empty(inst: Instance, r: int) -> bool:
    """Whether ``r`` greedy max-follower removals empty the network."""
    from .bounds import _best_single_removal
    import numpy as np

    alive = np.ones(inst.n, dtype=bool)
    for _ in range(r):
        if not alive.any():
            return True
        _, alive = _best_single_removal(inst, alive)
    return not alive.any()


def followers_assumption(inst: Instance, exact: bool = False) -> bool:
    """Check that fewer than b removals cannot empty the network.

    The cheap test certifies "yes" through the (k+b-1)-core bound and "no"
    through a greedy sequence of b-1 removals. When both are inconclusive
    the answer is True unless ``exact`` asks for a complete search.
    """
    b = inst.b
    if b <= 1:
        return inst.n > 0
    from .bounds import lower_bound_m
    if lower_bound_m(inst, budget=b - 1).m > 0:
        return True
    if greedy_can_empty(inst, b - 1):
        return False
    if not exact:
        return True
    from .solver import SolverConfig, branch_and_bound
    cfg = SolverConfig(method="bnb", use_followers=False)
    res = branch_and_bound(inst.with_budget(b - 1), cfg, target=0)
    return res.best_value > 0


def follower_cuts(inst: Instance, table: Sequence[frozenset[int]],
                  assumption: bool | None = None) -> CutList:
    """``sum_{j in J_u} w_j <= 1`` for every node u.

    Suppressed (empty list, ``suppressed`` set) when fewer than b removals
    can empty the network, since the cuts are then invalid.
    """
    inst.require_preprocessed()
    if assumption is None:
        assumption = followers_assumption(inst)
    out = CutList()
    if not assumption:
        out.suppressed = True
        log.info("follower cuts suppressed: the network can be emptied with fewer than b removals")
        return out
    for u, J in enumerate(table):
        out.append(_sum_cut(Kind.FOLLOWER, J, 1, 0, 1, LE, (u,)))
    return out


def general_follower_cut(inst: Instance, s: Iterable[int]) -> Cut:
    """``sum_{j in J_S} w_j <= |S|`` for ``|S| < b``."""
    s = sorted(set(s))
    if len(s) >= inst.b:
        raise ValueError(f"|S|={len(s)} must be below the budget {inst.b}")
    if not s:
        raise ValueError("empty S gives no cut on a preprocessed graph")
    remaining = int(survivors_mask(inst, s).sum())
    if remaining < inst.b - len(s):
        raise ValueError(
            f"guard fails: k-core without S has {remaining} nodes, fewer than b-|S|={inst.b - len(s)}")
    J = followers_set(inst, s)
    return _sum_cut(Kind.GENERAL_FOLLOWER, J, 1, 0, len(s), LE, tuple(s))


def _require_subcore(inst: Instance, k_set: frozenset[int], h: int):
    if not k_set:
        raise ValueError("empty node set")
    d = min_degree_of(inst.graph, k_set)
    if d < h:
        raise ValueError(f"node set induces minimum degree {d} < {h}")


def bigm_cut(inst: Instance, k_set: Iterable[int], m: int) -> Cut:
    """``z >= m + (|K| - m)(1 - sum_{i in K} w_i)`` for a k-subcore K."""
    K = frozenset(k_set)
    _require_subcore(inst, K, inst.k)
    if len(K) <= m:
        raise ValueError(f"|K|={len(K)} must exceed m={m}")
    return _sum_cut(Kind.BIGM, K, len(K) - m, 1, len(K), GE, tuple(sorted(K)))


def nogood_cut(inst: Instance, w_set: Iterable[int], m: int) -> Cut:
    """``z >= m + (|C_k(G - W)| - m)(sum_{i in W} w_i - b + 1)``."""
    W = sorted(set(w_set))
    if len(W) != inst.b:
        raise ValueError(f"|W|={len(W)} differs from the budget {inst.b}")
    c = int(survivors_mask(inst, W).sum())
    coef = c - m
    # z - coef * sum w >= m + coef * (1 - b)
    return _sum_cut(Kind.NOGOOD, W, -coef, 1, m + coef * (1 - inst.b), GE, tuple(W))


def hcore_cut(inst: Instance, k_set: Iterable[int], h: int, m: int) -> Cut:
    """``z >= m + (|K|-h+k-m)(1 - sum_{i in K} w_i / (h-k+1))`` for a node set
    K inducing minimum degree at least h > k."""
    K = frozenset(k_set)
    k = inst.k
    if h < k + 1:
        raise ValueError("h must exceed k")
    _require_subcore(inst, K, h)
    slope = len(K) - h + k - m
    if slope < 0:
        # with a negative slope the right-hand side grows past m once more
        # than h-k+1 nodes of K are hit, which is not implied by the bound
        raise ValueError(f"|K|-h+k={len(K) - h + k} is below m={m}; cut would be unsound")
    return _sum_cut(Kind.HCORE, K, Fraction(slope, h - k + 1), 1, len(K) - h + k, GE,
                    (tuple(sorted(K)), h))


def hcore_of(inst: Instance, removed: Iterable[int], h: int) -> frozenset[int]:
    """Nodes of coreness at least h in the graph minus ``removed``."""
    import numpy as np

    alive = np.ones(inst.n, dtype=bool)
    alive[list(removed)] = False
    return frozenset(int(v) for v in np.flatnonzero(peel(inst.graph, h, alive)))
