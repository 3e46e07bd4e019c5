"""Solver-agnostic model IR, LP-format text I/O and assignment checking.

All emitted models carry integer coefficients (rational cuts are scaled by
the lcm of their denominators), so the LP text is exact and round-trips.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bounds import lower_bound_m
from .cascade import Instance, collapse
from .graph import Graph
from .inequalities import (GE, LE, Cut, CutPool, dominance_cuts, follower_cuts,
                           followers_assumption, symmetry_cuts)
from .lp import LpProblem, build_detection_lp, build_dual, simplex_solve

INF = math.inf
KINDS = ("binary", "integer", "continuous")


@dataclass(frozen=True)
class Var:
    name: str
    kind: str = "continuous"
    lb: float = 0
    ub: float = INF


@dataclass
class Row:
    name: str
    coeffs: dict[str, int]
    sense: str
    rhs: int
    bilinear: list[tuple[int, str, str]] = field(default_factory=list)


@dataclass
class ModelIR:
    name: str = "model"
    sense: str = "min"
    objective: dict[str, int] = field(default_factory=dict)
    obj_constant: int = 0
    variables: list[Var] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)

    def __post_init__(self):
        self._index = {v.name: i for i, v in enumerate(self.variables)}

    def add_var(self, name, kind="continuous", lb=0, ub=INF) -> str:
        if kind not in KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if kind == "binary":
            lb, ub = 0, 1
        self._index[name] = len(self.variables)
        self.variables.append(Var(name, kind, lb, ub))
        return name

    def add_row(self, name, coeffs: Mapping[str, int] | Iterable[tuple[str, int]], sense, rhs,
                bilinear=()) -> Row:
        if sense not in (LE, GE, "="):
            raise ValueError(f"bad sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[str, int] = {}
        for v, a in items:
            if v not in self._index:
                raise KeyError(f"row {name} uses undeclared variable {v}")
            merged[v] = merged.get(v, 0) + a
        for _, p, q in bilinear:
            if p not in self._index or q not in self._index:
                raise KeyError(f"row {name} uses undeclared variable in {p}*{q}")
        merged = {v: a for v, a in merged.items() if a}
        row = Row(name, merged, sense, rhs, list(bilinear))
        self.rows.append(row)
        return row

    @property
    def is_linear(self) -> bool:
        return not any(r.bilinear for r in self.rows)

    def var(self, name: str) -> Var:
        return self.variables[self._index[name]]

    def row(self, name: str) -> Row:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def rows_named(self, prefix: str) -> list[Row]:
        return [r for r in self.rows if r.name.startswith(prefix)]

    def canonical(self) -> "ModelIR":
        """Same model with variables ordered by first appearance in the LP
        text (objective, rows, bounds, generals, binaries)."""
        order: dict[str, None] = {}
        for v in self.objective:
            order.setdefault(v, None)
        for r in self.rows:
            for v in r.coeffs:
                order.setdefault(v, None)
        for v in self.variables:
            if v.kind != "binary":
                order.setdefault(v.name, None)
        for v in self.variables:
            if v.kind == "binary":
                order.setdefault(v.name, None)
        # bounds section lists non-binaries in the order above; generals
        # and binaries follow it, which the parser reproduces
        return ModelIR(self.name, self.sense, dict(self.objective), self.obj_constant,
                       [self.var(n) for n in order], list(self.rows))

    def __eq__(self, other):
        if not isinstance(other, ModelIR):
            return NotImplemented
        return (self.name, self.sense, self.objective, self.obj_constant, self.variables,
                self.rows) == (other.name, other.sense, other.objective, other.obj_constant,
                               other.variables, other.rows)

    def to_json(self) -> dict:
        def bound(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
        return {
            "name": self.name,
            "sense": self.sense,
            "objective": self.objective,
            "obj_constant": self.obj_constant,
            "variables": [{"name": v.name, "kind": v.kind, "lb": bound(v.lb), "ub": bound(v.ub)}
                          for v in self.variables],
            "rows": [{"name": r.name, "coeffs": r.coeffs, "sense": r.sense, "rhs": r.rhs,
                      "bilinear": [list(t) for t in r.bilinear]} for r in self.rows],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _integer_row(cut: Cut, name_of) -> tuple[list[tuple[str, int]], int, int]:
    """Scale a cut to integer coefficients; returns (terms, z_coeff, rhs)."""
    nums = [Fraction(a) for a in cut.coeffs.values()] + [Fraction(cut.rhs)]
    scale = math.lcm(*(x.denominator for x in nums))
    terms = [(name_of(i), int(cut.coeffs[i] * scale)) for i in cut.nodes]
    return terms, cut.z_coeff * scale, int(cut.rhs * scale)


def _prune_cuts(inst: Instance, table) -> list[Cut]:
    cuts = list(dominance_cuts(table)) + list(symmetry_cuts(table))
    cuts += list(follower_cuts(inst, table, followers_assumption(inst, exact=True)))
    return cuts


def emit_time_dependent(inst: Instance, with_cuts: bool = False, T: int | None = None) -> ModelIR:
    """Time-indexed model: a_i_t = 1 iff node i is still present at round t.

    ``const_one_i_t`` reads  sum_{j~i} a_j^{t-1} - d(i) a_i^t + d(i) a_i^0 <= d(i) + k - 1
    with d(i) = |N(i)| - k + 1. ``with_cuts`` adds dominance, symmetry and
    follower rows rewritten through w_i = 1 - a_i^0, plus sum_i a_i^T >= m.
    """
    inst.require_preprocessed()
    g, k, n = inst.graph, inst.k, inst.n
    info = lower_bound_m(inst)
    if T is None:
        T = info.tightened_T
    model = ModelIR(name="time_dependent")

    def a(i, t):
        return f"a_{i}_{t}"

    for t in range(T + 1):
        for i in range(n):
            model.add_var(a(i, t), "binary")
    model.objective = {a(i, T): 1 for i in range(n)}
    model.add_row("budget", [(a(i, 0), 1) for i in range(n)], "=", n - inst.b)
    for t in range(1, T + 1):
        for i in range(n):
            model.add_row(f"onlyremoval_{i}_{t}", [(a(i, t), 1), (a(i, t - 1), -1)], LE, 0)
    for t in range(1, T + 1):
        for i in range(n):
            d = len(g.neighbors(i)) - k + 1
            terms = [(a(j, t - 1), 1) for j in g.neighbors(i)]
            terms += [(a(i, t), -d), (a(i, 0), d)]
            model.add_row(f"const_one_{i}_{t}", terms, LE, d + k - 1)
    if with_cuts:
        from .cascade import followers_table
        for idx, cut in enumerate(_prune_cuts(inst, followers_table(inst))):
            terms, _, rhs = _integer_row(cut, lambda i: a(i, 0))
            # sum c_i w_i  ~  rhs   with   w_i = 1 - a_i^0
            shift = sum(c for _, c in terms)
            flipped = {GE: LE, LE: GE}[cut.sense]
            model.add_row(f"{cut.kind.value}_{idx}", [(v, c) for v, c in terms],
                          flipped, shift - rhs)
        model.add_row("lower_bound", [(a(i, T), 1) for i in range(n)], GE, info.m)
    return model.canonical()


def emit_sparse_master(inst: Instance, pool: CutPool | Iterable[Cut] = ()) -> ModelIR:
    """min z over binary w and integer z with the budget row, z >= m and one
    row per pooled cut."""
    inst.require_preprocessed()
    n = inst.n
    m = lower_bound_m(inst).m
    model = ModelIR(name="sparse_master")
    for i in range(n):
        model.add_var(f"w_{i}", "binary")
    model.add_var("z", "integer", 0, n)
    model.objective = {"z": 1}
    model.add_row("budget", [(f"w_{i}", 1) for i in range(n)], "=", inst.b)
    model.add_row("lower_bound", [("z", 1)], GE, m)
    for idx, cut in enumerate(pool):
        terms, zc, rhs = _integer_row(cut, lambda i: f"w_{i}")
        if zc:
            terms = [("z", zc)] + terms
        model.add_row(f"{cut.kind.value}_{idx}", terms, cut.sense, rhs)
    return model.canonical()


def emit_nonlinear_dual(inst: Instance, linearize: bool = False, big_lambda: int | None = None,
                        with_cuts: bool = False) -> ModelIR:
    """min n - v with v <= sum_i (k - d_i) alpha_i + w_i lambda_i - tau_i and the
    dual feasibility rows of the detection LP.

    ``linearize`` replaces each product w_i lambda_i by p_i with the envelope
    p_i <= L w_i, p_i <= lambda_i, p_i >= lambda_i - L (1 - w_i), lambda_i <= L,
    where L defaults to n.
    """
    inst.require_preprocessed()
    g, k, n = inst.graph, inst.k, inst.n
    L = n if big_lambda is None else big_lambda
    deg = g.degree
    model = ModelIR(name="nonlinear_dual")
    model.add_var("v", "integer", 0, n)
    for i in range(n):
        model.add_var(f"w_{i}", "binary")
    for i in range(n):
        model.add_var(f"alpha_{i}")
    for i in range(n):
        for j in g.neighbors(i):
            model.add_var(f"beta_{i}_{j}")
    for i in range(n):
        for j in g.neighbors(i):
            model.add_var(f"gamma_{i}_{j}")
    for i in range(n):
        model.add_var(f"lambda_{i}", ub=L if linearize else INF)
    for i in range(n):
        model.add_var(f"tau_{i}")
    if linearize:
        for i in range(n):
            model.add_var(f"p_{i}")
    model.objective = {"v": -1}
    model.obj_constant = n

    terms = [("v", 1)] + [(f"alpha_{i}", -int(k - deg[i])) for i in range(n)]
    terms += [(f"tau_{i}", 1) for i in range(n)]
    if linearize:
        terms += [(f"p_{i}", -1) for i in range(n)]
        model.add_row("nonlin", terms, LE, 0)
    else:
        model.add_row("nonlin", terms, LE, 0, [(-1, f"w_{i}", f"lambda_{i}") for i in range(n)])
    model.add_row("budget", [(f"w_{i}", 1) for i in range(n)], "=", inst.b)
    for i in range(n):
        row = [(f"alpha_{i}", int(k - deg[i])), (f"lambda_{i}", 1), (f"tau_{i}", -1)]
        for j in g.neighbors(i):
            row += [(f"alpha_{j}", -1), (f"beta_{i}_{j}", 1), (f"gamma_{j}_{i}", 1)]
        model.add_row(f"dual1_{i}", row, LE, 1)
    for i in range(n):
        for j in g.neighbors(i):
            model.add_row(f"dual2_{i}_{j}",
                          [(f"alpha_{i}", 1), (f"beta_{i}_{j}", -1), (f"gamma_{i}_{j}", -1)], LE, 0)
    if linearize:
        for i in range(n):
            model.add_row(f"mc1_{i}", [(f"p_{i}", 1), (f"w_{i}", -L)], LE, 0)
            model.add_row(f"mc2_{i}", [(f"p_{i}", 1), (f"lambda_{i}", -1)], LE, 0)
            model.add_row(f"mc3_{i}", [(f"p_{i}", 1), (f"lambda_{i}", -1), (f"w_{i}", -L)],
                          GE, -L)
    if with_cuts:
        from .cascade import followers_table
        for idx, cut in enumerate(_prune_cuts(inst, followers_table(inst))):
            t, _, rhs = _integer_row(cut, lambda i: f"w_{i}")
            model.add_row(f"{cut.kind.value}_{idx}", t, cut.sense, rhs)
        model.add_row("lower_bound", [("v", 1)], LE, n - lower_bound_m(inst).m)
    return model.canonical()


def ir_from_lp(p: LpProblem, name: str = "detection") -> ModelIR:
    def as_int(x):
        if not math.isfinite(x):
            return x
        if x != int(x):
            raise ValueError(f"non-integer coefficient {x}")
        return int(x)

    model = ModelIR(name=name, sense=p.sense)
    for nm, lb, ub in zip(p.names, p.lb, p.ub):
        model.add_var(nm, "continuous", as_int(lb), as_int(ub))
    model.objective = {p.names[j]: as_int(c) for j, c in enumerate(p.objective) if c}
    for rname, (coeffs, s, rhs) in zip(p.row_names, p.rows):
        model.add_row(rname, [(p.names[j], as_int(a)) for j, a in coeffs.items()], s, as_int(rhs))
    return model.canonical()


def emit_detection_lp(g: Graph, k: int, w: Sequence[int] | None = None) -> ModelIR:
    return ir_from_lp(build_detection_lp(g, k, w))


# LP text -------------------------------------------------------------------

_WIDTH = 78


def _num(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        if x == int(x):
            return str(int(x))
        return repr(x)
    return str(x)


def _expr(terms: Iterable[tuple[int, str]]) -> list[str]:
    out = []
    for c, v in terms:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        out.append(f"{sign} {v}" if mag == 1 else f"{sign} {_num(mag)} {v}")
    if out and out[0].startswith("+ "):
        out[0] = out[0][2:]
    return out


def _wrap(head: str, pieces: list[str]) -> list[str]:
    lines, cur = [], head
    for p in pieces:
        if len(cur) + 1 + len(p) > _WIDTH and cur.strip() and not cur.endswith(":"):
            lines.append(cur)
            cur = "   " + p
        else:
            cur = f"{cur} {p}"
    lines.append(cur)
    return lines


def write_lp_text(m: ModelIR) -> str:
    """LP-format text with Minimize/Maximize, Subject To, Bounds, Generals,
    Binaries and End sections. Bilinear models are refused."""
    if not m.is_linear:
        raise ValueError("model has bilinear terms; emit it with linearize=True")
    m = m.canonical()
    out = [f"\\ {m.name}", "Minimize" if m.sense == "min" else "Maximize"]
    obj = _expr((c, v) for v, c in m.objective.items())
    if m.obj_constant:
        obj.append(("- " if m.obj_constant < 0 else "+ ") + _num(abs(m.obj_constant)))
        if len(obj) == 1 and obj[0].startswith("+ "):
            obj[0] = obj[0][2:]
    out += _wrap(" obj:", obj or ["0"])
    out.append("Subject To")
    for r in m.rows:
        body = _expr((c, v) for v, c in r.coeffs.items()) or ["0"]
        out += _wrap(f" {r.name}:", body + [r.sense, _num(r.rhs)])
    out.append("Bounds")
    for v in m.variables:
        if v.kind == "binary":
            continue
        if v.lb == -INF and v.ub == INF:
            out.append(f" {v.name} free")
        elif v.ub == INF:
            out.append(f" {v.name} >= {_num(v.lb)}")
        else:
            out.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    gens = [v.name for v in m.variables if v.kind == "integer"]
    bins = [v.name for v in m.variables if v.kind == "binary"]
    if gens:
        out.append("Generals")
        out += _wrap("", gens)
    if bins:
        out.append("Binaries")
        out += _wrap("", bins)
    out.append("End")
    return "\n".join(out) + "\n"


_SECTIONS = {"minimize": "obj", "maximize": "obj", "subject to": "st", "bounds": "bounds",
             "generals": "gen", "binaries": "bin", "end": "end"}


_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?|[+-]?inf(inity)?", re.I)


def _parse_number(tok: str):
    t = tok.lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if t in ("-inf", "-infinity"):
        return -INF
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def _parse_terms(tokens: list[str]) -> tuple[dict[str, int], int]:
    terms: dict[str, int] = {}
    const = 0
    sign, coef = 1, None
    for tok in tokens:
        if tok in "+-":
            sign = -1 if tok == "-" else 1
            continue
        if _NUMBER.fullmatch(tok):
            coef = _parse_number(tok)
            continue
        terms[tok] = terms.get(tok, 0) + sign * (1 if coef is None else coef)
        sign, coef = 1, None
    if coef is not None:
        const = sign * coef
    return terms, const


def parse_lp_text(text: str) -> ModelIR:
    """Inverse of :func:`write_lp_text` for the subset it produces."""
    name = "model"
    section = None
    sense = "min"
    obj_tokens: list[str] = []
    rows: list[list] = []
    bounds: dict[str, tuple] = {}
    gens: list[str] = []
    bins: list[str] = []
    appearance: dict[str, None] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if section is None:
                name = line[1:].strip()
            continue
        key = line.lower()
        if key in _SECTIONS and not raw.startswith(" "):
            section = _SECTIONS[key]
            if key == "maximize":
                sense = "max"
            continue
        if section == "obj":
            if ":" in line:
                line = line.split(":", 1)[1]
            obj_tokens += line.split()
        elif section == "st":
            if ":" in line:
                rname, rest = line.split(":", 1)
                rows.append([rname.strip(), rest.split()])
            else:
                rows[-1][1] += line.split()
        elif section == "bounds":
            toks = line.split()
            if len(toks) == 2 and toks[1].lower() == "free":
                bounds[toks[0]] = (-INF, INF)
            elif len(toks) == 3 and toks[1] == ">=":
                bounds[toks[0]] = (_parse_number(toks[2]), INF)
            elif len(toks) == 3 and toks[1] == "<=":
                bounds[toks[0]] = (0, _parse_number(toks[2]))
            elif len(toks) == 5:
                bounds[toks[2]] = (_parse_number(toks[0]), _parse_number(toks[4]))
            else:
                raise ValueError(f"cannot parse bound {line!r}")
        elif section == "gen":
            gens += line.split()
        elif section == "bin":
            bins += line.split()

    objective, const = _parse_terms(obj_tokens)
    objective = {v: c for v, c in objective.items() if c}
    for v in objective:
        appearance.setdefault(v, None)
    parsed_rows = []
    for rname, toks in rows:
        idx = next(i for i, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>"))
        s = {"=<": "<=", "=>": ">="}.get(toks[idx], toks[idx])
        coeffs, _ = _parse_terms(toks[:idx])
        coeffs.pop("0", None)
        for v in coeffs:
            appearance.setdefault(v, None)
        parsed_rows.append((rname, coeffs, s, _parse_number(" ".join(toks[idx + 1:]))))
    for v in bounds:
        appearance.setdefault(v, None)
    for v in gens + bins:
        appearance.setdefault(v, None)

    model = ModelIR(name=name, sense=sense, obj_constant=const)
    gens_set, bins_set = set(gens), set(bins)
    for v in appearance:
        if v in bins_set:
            model.add_var(v, "binary")
        else:
            lb, ub = bounds.get(v, (0, INF))
            model.add_var(v, "integer" if v in gens_set else "continuous", lb, ub)
    model.objective = objective
    for rname, coeffs, s, rhs in parsed_rows:
        model.add_row(rname, coeffs, s, rhs)
    return model


# checking ------------------------------------------------------------------

def evaluate_model(m: ModelIR, assignment: Mapping[str, float], tol: float = 1e-9) -> dict:
    """Row-by-row feasibility check.

    Rows over integer and binary variables only are compared exactly;
    rows touching continuous variables use an absolute tolerance ``tol``.
    """
    missing = [v.name for v in m.variables if v.name not in assignment]
    if missing:
        raise KeyError(f"assignment misses variables: {', '.join(missing)}")
    violations = []
    discrete = {v.name for v in m.variables if v.kind != "continuous"}
    for v in m.variables:
        x = assignment[v.name]
        if v.kind != "continuous" and x != int(x):
            violations.append(f"{v.name}: {x} is not integral")
        if x < v.lb - (0 if v.name in discrete else tol) or x > v.ub + (0 if v.name in discrete else tol):
            violations.append(f"{v.name}: {x} outside [{v.lb}, {v.ub}]")
    for r in m.rows:
        exact = all(v in discrete for v in r.coeffs) and all(
            p in discrete and q in discrete for _, p, q in r.bilinear)
        if exact:
            lhs = sum(Fraction(c) * Fraction(assignment[v]) for v, c in r.coeffs.items())
            lhs += sum(Fraction(c) * Fraction(assignment[p]) * Fraction(assignment[q])
                       for c, p, q in r.bilinear)
            slack = 0
        else:
            lhs = sum(c * float(assignment[v]) for v, c in r.coeffs.items())
            lhs += sum(c * float(assignment[p]) * float(assignment[q]) for c, p, q in r.bilinear)
            slack = tol
        ok = (lhs <= r.rhs + slack if r.sense == LE else
              lhs >= r.rhs - slack if r.sense == GE else abs(lhs - r.rhs) <= slack)
        if not ok:
            violations.append(f"{r.name}: lhs {float(lhs):g} {r.sense} {r.rhs}")
    obj = m.obj_constant + sum(c * assignment[v] for v, c in m.objective.items())
    return {"feasible": not violations, "violations": violations, "objective": obj}


def cascade_to_assignment(inst: Instance, w: Iterable[int], T: int | None = None) -> dict[str, int]:
    """a_i_t values of the synchronous cascade started by interdicting ``w``,
    held constant after it stops."""
    w = frozenset(w)
    if len(w) != inst.b:
        raise ValueError(f"|w|={len(w)} differs from the budget {inst.b}")
    if T is None:
        T = lower_bound_m(inst).tightened_T
    trace = collapse(inst, w)
    if trace.rounds > T:
        raise ValueError(f"cascade runs {trace.rounds} rounds, more than the horizon T={T}")
    out = {}
    for i in range(inst.n):
        r = int(trace.removed_at[i])
        for t in range(T + 1):
            out[f"a_{i}_{t}"] = 0 if 0 <= r <= t else 1
    return out


def master_assignment(inst: Instance, w: Iterable[int]) -> dict[str, int]:
    """(chi_W, |C_k(G - W)|) in the sparse master's variable names."""
    w = frozenset(w)
    out = {f"w_{i}": int(i in w) for i in range(inst.n)}
    out["z"] = int(collapse(inst, w).survivors.__len__())
    return out


def dual_assignment(inst: Instance, w: Iterable[int], linearize: bool = False,
                    big_lambda: int | None = None) -> dict[str, float]:
    """Point of the nonlinear dual model built from an optimal dual LP
    solution on G - W. With ``linearize`` lambda is capped at L (default n)
    so the envelope applies; see ``lp.min_lambda_cap`` for when that is
    enough to keep the optimum."""
    w = frozenset(w)
    n = inst.n
    chi = np.array([int(i in w) for i in range(n)])
    cap = (n if big_lambda is None else big_lambda) if linearize else None
    p = build_dual(inst.graph, inst.k, chi, lambda_cap=cap)
    sol = simplex_solve(p)
    if sol.status != "Optimal":
        raise RuntimeError(f"dual LP ended with status {sol.status}")
    out: dict[str, float] = dict(zip(p.names, (float(x) for x in sol.x)))
    for i in range(n):
        out[f"w_{i}"] = int(chi[i])
        if linearize:
            out[f"p_{i}"] = chi[i] * out[f"lambda_{i}"]
    out["v"] = math.floor(sol.objective + 1e-7)
    return out
