"""Command-line front end.

    collapse-core decompose GRAPH --k 2
    collapse-core solve GRAPH --k 2 --b 3 --method cutting-plane
    collapse-core emit GRAPH --k 2 --b 3 --model td --out karate.lp
    collapse-core bench manifest.json --out runs.csv

GRAPH is an edge-list path or the name of a known network. Exit codes:
0 success, 2 input or parse error, 3 infeasible, 4 stopped at the time
limit with a feasible solution.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import datasets
from .bounds import greedy_upper_bound, lower_bound_m
from .cascade import Instance, preprocess
from .graph import Graph, ParseError, core_decomposition, read_edge_list
from .solver import FEASIBLE, INFEASIBLE, METHODS, OPTIMAL, SolverConfig, solve

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TIME_LIMIT = 0, 2, 3, 4

CSV_COLUMNS = ("instance", "k", "b", "method", "value", "lb", "gap_pct", "time_s", "nodes",
               "status")


@dataclass
class RunReport:
    instance: str
    n: int
    m: int
    n_pre: int
    m_pre: int
    k: int
    b: int
    method: str
    value: int | None
    lb: int | None
    status: str
    time_s: float
    nodes: int = 0
    cuts: dict[str, int] = field(default_factory=dict)
    greedy_value: int | None = None
    bound_m: int | None = None
    best_set: list = field(default_factory=list)
    error: str = ""

    @property
    def gap_pct(self) -> float | None:
        if self.value is None or self.lb is None:
            return None
        if self.value <= 0:
            return 0.0
        return 100.0 * (self.value - self.lb) / self.value

    def to_json(self) -> dict:
        out = {
            "instance": self.instance, "n": self.n, "m": self.m,
            "n_preprocessed": self.n_pre, "m_preprocessed": self.m_pre,
            "k": self.k, "b": self.b, "method": self.method, "status": self.status,
            "value": self.value, "lb": self.lb, "gap_pct": self.gap_pct,
            "time_s": round(self.time_s, 6), "nodes": self.nodes, "cuts": self.cuts,
            "m_bound": self.bound_m, "greedy_value": self.greedy_value,
            "set": self.best_set,
        }
        if self.error:
            out["error"] = self.error
        return out

    def csv_row(self) -> list:
        gap = self.gap_pct
        return [self.instance, self.k, self.b, self.method,
                "" if self.value is None else self.value,
                "" if self.lb is None else self.lb,
                "" if gap is None else f"{gap:.2f}", f"{self.time_s:.3f}", self.nodes,
                self.status]


def load_graph(source: str) -> tuple[str, Graph]:
    p = Path(source)
    if p.is_file():
        return p.stem, read_edge_list(p, separator="," if p.suffix == ".csv" else None)
    if source in datasets.BENCHMARKS or source in datasets.BUNDLED:
        return source, datasets.load(source)
    raise FileNotFoundError(f"no such file or known network: {source}")


def run(name: str, g: Graph, k: int, b: int, cfg: SolverConfig) -> RunReport:
    raw = Instance(g, k, b)
    inst = preprocess(raw)
    base = dict(instance=name, n=g.n, m=g.m, n_pre=inst.n, m_pre=inst.graph.m, k=k, b=b,
                method=cfg.method)
    if b > inst.n:
        return RunReport(**base, value=None, lb=None, status=INFEASIBLE, time_s=0.0)
    res = solve(inst, cfg)
    labels = inst.graph.label_of(res.best_w)
    gv = greedy_upper_bound(inst)[1] if b >= 1 else None
    return RunReport(**base, value=res.best_value, lb=res.proven_lb, status=res.status,
                     time_s=res.wall_time, nodes=res.nodes_explored, cuts=res.cuts_added,
                     greedy_value=gv, bound_m=lower_bound_m(inst).m, best_set=labels)


def _config(args) -> SolverConfig:
    return SolverConfig(method=args.method, time_limit=args.time_limit,
                        use_dominance=not args.no_dominance, use_symmetry=not args.no_symmetry,
                        use_followers=not args.no_followers, u_threshold=args.u_threshold,
                        ell_offset=args.ell_offset)


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(reports: list[RunReport], footer: bool) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for r in reports:
        wr.writerow(r.csv_row())
    if footer:
        buf.write(bench_footer(reports) + "\n")
    return buf.getvalue()


def bench_footer(reports: list[RunReport]) -> str:
    done = [r for r in reports if r.gap_pct is not None]
    n_opt = sum(1 for r in done if r.gap_pct == 0)
    mean_gap = sum(r.gap_pct for r in done) / len(done) if done else 0.0
    mean_time = sum(r.time_s for r in done) / len(done) if done else 0.0
    return f"# opt={n_opt} mean_gap={mean_gap:.2f} mean_time={mean_time:.3f}"


def cmd_decompose(args) -> int:
    name, g = load_graph(args.graph)
    dec = core_decomposition(g)
    core = dec.core(args.k)
    sub_edges = sum(1 for i, j in g.edges() if i in core and j in core)
    print(f"{len(core)} {sub_edges}")
    hist = Counter(int(c) for c in dec.coreness)
    for c in sorted(hist):
        print(f"coreness {c}: {hist[c]}")
    return EXIT_OK


def cmd_solve(args) -> int:
    name, g = load_graph(args.graph)
    rep = run(name, g, args.k, args.b, _config(args))
    text = (_csv([rep], footer=False) if args.format == "csv"
            else json.dumps(rep.to_json(), indent=2) + "\n")
    _write(text, args.out)
    return {INFEASIBLE: EXIT_INFEASIBLE, FEASIBLE: EXIT_TIME_LIMIT}.get(rep.status, EXIT_OK)


def cmd_emit(args) -> int:
    from . import emit
    from .cascade import followers_table
    from .inequalities import CutPool

    _, g = load_graph(args.graph)
    inst = preprocess(Instance(g, args.k, args.b))
    if args.model == "td":
        model = emit.emit_time_dependent(inst, with_cuts=args.with_cuts)
    elif args.model == "sparse":
        pool = CutPool()
        if args.with_cuts:
            pool.extend(emit._prune_cuts(inst, followers_table(inst)))
        model = emit.emit_sparse_master(inst, pool)
    elif args.model == "dual":
        model = emit.emit_nonlinear_dual(inst, linearize=not args.bilinear,
                                         with_cuts=args.with_cuts)
    else:
        model = emit.emit_detection_lp(inst.graph, args.k)
    if args.format == "json" or not model.is_linear:
        text = model.dumps() + "\n"
    else:
        text = emit.write_lp_text(model)
    _write(text, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = json.loads(manifest_path.read_text())
    methods = manifest.get("methods", ["bnb"])
    limit = args.time_limit if args.time_limit is not None else manifest.get("time_limit")
    reports = []
    # rows run one after another in manifest order
    for entry in manifest["instances"]:
        gp = entry.get("graph_path") or entry["graph"]
        if not Path(gp).is_absolute() and (manifest_path.parent / gp).is_file():
            gp = str(manifest_path.parent / gp)
        for method in entry.get("methods", methods):
            name = entry.get("name") or Path(gp).stem
            try:
                _, g = load_graph(gp)
                cfg = SolverConfig(method=method, time_limit=limit,
                                   use_dominance=not args.no_dominance,
                                   use_symmetry=not args.no_symmetry,
                                   use_followers=not args.no_followers,
                                   u_threshold=args.u_threshold, ell_offset=args.ell_offset)
                rep = run(name, g, int(entry["k"]), int(entry["b"]), cfg)
            except Exception as exc:  # recorded, the sweep goes on
                logging.getLogger(__name__).warning("%s/%s failed: %s", name, method, exc)
                rep = RunReport(name, 0, 0, 0, 0, int(entry.get("k", 0)), int(entry.get("b", 0)),
                                method, None, None, "Error", 0.0, error=str(exc))
            reports.append(rep)
    if args.format == "json":
        text = json.dumps({"runs": [r.to_json() for r in reports],
                           "footer": bench_footer(reports)[2:]}, indent=2) + "\n"
    else:
        text = _csv(reports, footer=True)
    _write(text, args.out)
    return EXIT_OK


def _solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", choices=METHODS, default="bnb")
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--no-dominance", action="store_true")
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--no-followers", action="store_true")
    p.add_argument("--u-threshold", type=int, default=10,
                   help="cap on BigM cuts per separation round")
    p.add_argument("--ell-offset", type=int, default=2,
                   help="h-core cuts for h = k+1 .. k+ell-offset")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="collapse-core",
                                 description="Collapsed k-core solver and model emitter.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="k-core size and coreness histogram")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("solve", help="find the b collapsers minimising the k-core")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    _solver_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("emit", help="write a model as LP text or JSON")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--model", choices=("td", "sparse", "dual", "detect"), default="td")
    p.add_argument("--with-cuts", action="store_true")
    p.add_argument("--bilinear", action="store_true",
                   help="keep w*lambda products in the dual model (JSON only)")
    p.add_argument("--format", choices=("lp", "json"), default="lp")
    p.add_argument("--out")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("bench", help="run a manifest of instances and methods")
    p.add_argument("manifest")
    _solver_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
