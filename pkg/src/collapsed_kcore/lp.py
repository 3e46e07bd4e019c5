"""Linear programs for k-core detection with interdiction.

``build_detection_lp`` gives the continuous relaxation whose optimum is
integral and equals the number of nodes outside the k-core of the graph
minus the interdicted set; ``build_dual`` gives its LP dual. ``simplex_solve``
is a dense two-phase primal simplex with Bland's rule that also returns
row multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Graph

LE, GE, EQ = "<=", ">=", "="


@dataclass
class LpProblem:
    """``sense`` c.x subject to sparse rows, ``lb <= x <= ub``."""

    names: list[str] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    rows: list[tuple[dict[int, float], str, float]] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    sense: str = "min"
    constant: float = 0.0

    @property
    def num_vars(self) -> int:
        return len(self.names)

    def add_var(self, name: str, cost: float = 0.0, lb: float = 0.0, ub: float = np.inf) -> int:
        self.names.append(name)
        self.objective.append(cost)
        self.lb.append(lb)
        self.ub.append(ub)
        return len(self.names) - 1

    def add_row(self, name: str, coeffs: dict[int, float], sense: str, rhs: float) -> int:
        if sense not in (LE, GE, EQ):
            raise ValueError(f"bad row sense {sense!r}")
        for j in coeffs:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"row {name} references variable {j}")
        self.rows.append((dict(coeffs), sense, float(rhs)))
        self.row_names.append(name)
        return len(self.rows) - 1

    def index(self, name: str) -> int:
        return self.names.index(name)

    def dense(self) -> tuple[np.ndarray, np.ndarray, list[str]]:
        A = np.zeros((len(self.rows), self.num_vars))
        b = np.zeros(len(self.rows))
        senses = []
        for r, (coeffs, s, rhs) in enumerate(self.rows):
            for j, a in coeffs.items():
                A[r, j] += a
            b[r] = rhs
            senses.append(s)
        return A, b, senses


@dataclass
class LpSolution:
    status: str
    x: np.ndarray
    duals: np.ndarray
    objective: float
    iterations: int
    basis: tuple[int, ...] = ()
    names: Sequence[str] = ()

    def value(self, name: str) -> float:
        return float(self.x[list(self.names).index(name)])

    def values(self, prefix: str) -> np.ndarray:
        return np.array([v for nm, v in zip(self.names, self.x) if nm.startswith(prefix)])


class _Tableau:
    """Dense simplex tableau in the form  min c.x, A x = b, x >= 0."""

    def __init__(self, A, b, basis, tol):
        m, N = A.shape
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = A
        self.T[:m, N] = b
        self.basis = list(basis)
        self.m, self.N = m, N
        self.tol = tol
        self.iterations = 0

    def set_costs(self, c):
        T = self.T
        T[-1, :self.N] = c
        T[-1, self.N] = 0.0
        for r, j in enumerate(self.basis):
            if T[-1, j] != 0.0:
                T[-1] -= T[-1, j] * T[r]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(np.abs(col) > 0.0)
        if len(nz):
            T[nz] -= np.outer(col[nz], T[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray, max_iter: int) -> str:
        """Bland's rule: lowest-index improving column, lowest-index leaving
        variable among ratio ties."""
        T, tol = self.T, self.tol
        m, N = self.m, self.N
        while True:
            if self.iterations >= max_iter:
                return "IterationLimit"
            rc = T[-1, :N]
            cand = np.flatnonzero((rc < -tol) & allowed)
            if not len(cand):
                return "Optimal"
            j = int(cand[0])
            col = T[:m, j]
            pos = np.flatnonzero(col > tol)
            if not len(pos):
                return "Unbounded"
            ratios = T[pos, N] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + tol * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, j)


def simplex_solve(p: LpProblem, tol: float = 1e-9, max_iter: int = 200_000) -> LpSolution:
    """Two-phase primal simplex with Bland's anti-cycling rule.

    ``duals[i]`` is the multiplier of row i in the problem's own sense, so
    that the dual objective ``sum(duals * rhs)`` (plus bound terms) equals
    the primal one at optimality. Finite upper bounds become extra rows
    whose multipliers are not reported.
    """
    A0, b0, senses = p.dense()
    lb = np.asarray(p.lb, dtype=float)
    ub = np.asarray(p.ub, dtype=float)
    c = np.asarray(p.objective, dtype=float)
    if p.sense == "max":
        c = -c
    if np.isneginf(lb).any():
        raise ValueError("free variables are not supported")
    nrows, nv = A0.shape
    # shift x = lb + x'
    b0 = b0 - A0 @ lb
    const = float(c @ lb)
    bounded = np.flatnonzero(np.isfinite(ub))
    A = np.vstack([A0, np.eye(nv)[bounded]]) if len(bounded) else A0
    b = np.concatenate([b0, (ub - lb)[bounded]])
    senses = senses + [LE] * len(bounded)
    M = A.shape[0]

    flip = np.ones(M)
    for i in range(M):
        s = senses[i]
        if b[i] < 0 or (b[i] == 0 and s == GE):
            flip[i] = -1.0
            A[i] = -A[i]
            b[i] = -b[i]
            senses[i] = {LE: GE, GE: LE, EQ: EQ}[s]

    n_slack = sum(1 for s in senses if s in (LE, GE))
    n_art = sum(1 for s in senses if s in (GE, EQ))
    N = nv + n_slack + n_art
    full = np.zeros((M, N))
    full[:, :nv] = A
    basis = [0] * M
    ident = [0] * M
    sc, ac = nv, nv + n_slack
    for i, s in enumerate(senses):
        if s == LE:
            full[i, sc] = 1.0
            basis[i] = ident[i] = sc
            sc += 1
        elif s == GE:
            full[i, sc] = -1.0
            sc += 1
            full[i, ac] = 1.0
            basis[i] = ident[i] = ac
            ac += 1
        else:
            full[i, ac] = 1.0
            basis[i] = ident[i] = ac
            ac += 1

    tab = _Tableau(full, b, basis, tol)
    art = np.zeros(N, dtype=bool)
    art[nv + n_slack:] = True

    if n_art:
        tab.set_costs(art.astype(float))
        status = tab.run(np.ones(N, dtype=bool), max_iter)
        if status == "IterationLimit":
            return _fail(p, status, tab.iterations)
        if -tab.T[-1, N] > 1e-7 * max(1.0, np.abs(b).max()):
            return _fail(p, "Infeasible", tab.iterations)
        # drive zero-level artificials out of the basis where possible
        for r, j in enumerate(list(tab.basis)):
            if art[j]:
                row = tab.T[r, :nv + n_slack]
                nz = np.flatnonzero(np.abs(row) > tol)
                if len(nz):
                    tab.pivot(r, int(nz[0]))

    cost = np.zeros(N)
    cost[:nv] = c
    tab.set_costs(cost)
    status = tab.run(~art, max_iter)
    if status != "Optimal":
        return _fail(p, status, tab.iterations)

    x = np.zeros(N)
    for r, j in enumerate(tab.basis):
        x[j] = tab.T[r, N]
    xv = x[:nv] + lb
    obj = float(c @ x[:nv]) + const
    # reduced cost of a row's initial identity column is minus its multiplier
    y = -tab.T[-1, ident] * flip
    duals = y[:nrows]
    if p.sense == "max":
        obj, duals = -obj, -duals
    return LpSolution("Optimal", xv, duals, obj + p.constant, tab.iterations,
                      tuple(tab.basis), tuple(p.names))


def _fail(p, status, iterations):
    nan = np.full(p.num_vars, np.nan)
    return LpSolution(status, nan, np.full(len(p.rows), np.nan), np.nan, iterations,
                      (), tuple(p.names))


def build_detection_lp(g: Graph, k: int, w: Sequence[int] | None = None,
                       mccormick: bool = False) -> LpProblem:
    """min sum u over u in [0,1]^n, x >= 0 (one x per undirected edge):

    * ``lin1_i``:  sum_{j~i} u_j - sum_{e~i} x_e + (d_i - k) u_i <= d_i - k
    * ``lin2_i_j``/``lin3_i_j``:  x_ij <= u_i,  x_ij <= u_j
    * ``lin4_i``:  u_i >= w_i   (only when ``w`` is given)
    * ``ub_i``:    u_i <= 1

    ``mccormick`` adds the redundant rows x_ij >= u_i + u_j - 1, x_ij <= 1.
    """
    if k < 1:
        raise ValueError("k must be positive")
    p = LpProblem()
    n = g.n
    for i in range(n):
        p.add_var(f"u_{i}", 1.0)
    edge_var = {}
    for i, j in g.edges():
        edge_var[i, j] = p.add_var(f"x_{i}_{j}")
    deg = g.degree
    for i in range(n):
        row: dict[int, float] = {}
        for j in g.neighbors(i):
            row[j] = row.get(j, 0.0) + 1.0
            row[edge_var[min(i, j), max(i, j)]] = -1.0
        if deg[i] != k:
            row[i] = row.get(i, 0.0) + float(deg[i] - k)
        p.add_row(f"lin1_{i}", row, LE, float(deg[i] - k))
    for (i, j), e in edge_var.items():
        p.add_row(f"lin2_{i}_{j}", {e: 1.0, i: -1.0}, LE, 0.0)
        p.add_row(f"lin3_{i}_{j}", {e: 1.0, j: -1.0}, LE, 0.0)
        if mccormick:
            p.add_row(f"mc_{i}_{j}", {e: 1.0, i: -1.0, j: -1.0}, GE, -1.0)
            p.add_row(f"xub_{i}_{j}", {e: 1.0}, LE, 1.0)
    if w is not None:
        w = np.asarray(w)
        if len(w) != n:
            raise ValueError("interdiction vector has the wrong length")
        for i in range(n):
            p.add_row(f"lin4_{i}", {i: 1.0}, GE, float(w[i]))
    for i in range(n):
        p.add_row(f"ub_{i}", {i: 1.0}, LE, 1.0)
    return p


def build_dual(g: Graph, k: int, w: Sequence[int], lambda_cap: float | None = None) -> LpProblem:
    """Dual of the detection LP written with one x per ordered pair (i, j).

    max sum_i (k - d_i) alpha_i + w_i lambda_i - tau_i  subject to

    * ``dual1_i``: (k-d_i) alpha_i + lambda_i - tau_i
      + sum_{j~i} (-alpha_j + beta_ij + gamma_ji) <= 1
    * ``dual2_i_j``: alpha_i - beta_ij - gamma_ij <= 0

    ``beta_ij`` prices x_ij <= u_i and ``gamma_ij`` prices x_ij <= u_j, so
    node i's row carries the gamma of the reversed pair (j, i).
    ``lambda_cap`` bounds every lambda_i from above.
    """
    n = g.n
    w = np.asarray(w)
    if len(w) != n:
        raise ValueError("interdiction vector has the wrong length")
    deg = g.degree
    p = LpProblem(sense="max")
    alpha = [p.add_var(f"alpha_{i}", float(k - deg[i])) for i in range(n)]
    beta, gamma = {}, {}
    for i in range(n):
        for j in g.neighbors(i):
            beta[i, j] = p.add_var(f"beta_{i}_{j}")
    for i in range(n):
        for j in g.neighbors(i):
            gamma[i, j] = p.add_var(f"gamma_{i}_{j}")
    cap = np.inf if lambda_cap is None else float(lambda_cap)
    lam = [p.add_var(f"lambda_{i}", float(w[i]), ub=cap) for i in range(n)]
    tau = [p.add_var(f"tau_{i}", -1.0) for i in range(n)]
    for i in range(n):
        row = {alpha[i]: float(k - deg[i]), lam[i]: 1.0, tau[i]: -1.0}
        for j in g.neighbors(i):
            row[alpha[j]] = row.get(alpha[j], 0.0) - 1.0
            row[beta[i, j]] = 1.0
            row[gamma[j, i]] = 1.0
        p.add_row(f"dual1_{i}", row, LE, 1.0)
    for i in range(n):
        for j in g.neighbors(i):
            p.add_row(f"dual2_{i}_{j}", {alpha[i]: 1.0, beta[i, j]: -1.0, gamma[i, j]: -1.0},
                      LE, 0.0)
    return p


def verify_integrality(s: LpSolution, tol: float = 1e-6) -> bool:
    """True when every ``u_i`` of an optimal solution is within ``tol`` of 0 or 1."""
    if s.status != "Optimal":
        return False
    u = np.array([v for nm, v in zip(s.names, s.x) if nm.startswith("u_")])
    if not len(u):
        u = np.asarray(s.x)
    return bool(np.all(np.minimum(np.abs(u), np.abs(u - 1.0)) <= tol))


def detection_value(g: Graph, k: int, w: Sequence[int] | None = None) -> tuple[float, LpSolution]:
    """Optimal ``sum u`` of the detection LP and the solution itself."""
    sol = simplex_solve(build_detection_lp(g, k, w))
    return sol.objective, sol


def primal_residual(p: LpProblem, x: np.ndarray) -> float:
    """Largest violation of a row or bound at ``x``."""
    A, b, senses = p.dense()
    ax = A @ x
    worst = 0.0
    for v, rhs, s in zip(ax, b, senses):
        if s == LE:
            worst = max(worst, v - rhs)
        elif s == GE:
            worst = max(worst, rhs - v)
        else:
            worst = max(worst, abs(v - rhs))
    worst = max(worst, float(np.max(np.asarray(p.lb) - x, initial=0.0)))
    worst = max(worst, float(np.max(x - np.asarray(p.ub), initial=0.0)))
    return worst


def min_lambda_cap(g: Graph, k: int, w: Sequence[int], tol: float = 1e-9) -> float:
    """Smallest L such that capping every lambda_i at L keeps the dual optimum.

    Only interdicted nodes matter: lambda_i of a node with w_i = 0 can be
    set to 0 without losing feasibility or objective.
    """
    base = build_dual(g, k, w)
    opt = simplex_solve(base, tol)
    if opt.status != "Optimal":
        raise RuntimeError(f"dual LP ended with status {opt.status}")
    p = LpProblem(list(base.names), [0.0] * base.num_vars, list(base.lb), list(base.ub),
                  list(base.rows), list(base.row_names), sense="min")
    t = p.add_var("cap", 1.0)
    goal = {j: c for j, c in enumerate(base.objective) if c}
    p.add_row("keep_optimum", goal, GE, opt.objective - 1e-9 * (1 + abs(opt.objective)))
    for i, wi in enumerate(w):
        if wi:
            p.add_row(f"cap_{i}", {base.index(f"lambda_{i}"): 1.0, t: -1.0}, LE, 0.0)
    sol = simplex_solve(p, tol)
    if sol.status != "Optimal":
        raise RuntimeError(f"cap LP ended with status {sol.status}")
    return float(sol.objective)
