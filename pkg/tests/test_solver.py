from itertools import combinations

import networkx as nx
import pytest

from collapsed_kcore import (Instance, SolverConfig, branch_and_bound, brute_force,
                             collapsed_size, cutting_plane, lower_bound_m, preprocess, solve)
from collapsed_kcore.cascade import NotPreprocessedError

from conftest import clique, random_instances, to_nx

FLAG_SETS = [
    dict(),
    dict(use_dominance=False, use_symmetry=False, use_followers=False),
    dict(use_followers=False),
    dict(use_dominance=False),
    dict(u_threshold=0, ell_offset=0),
]


def nx_optimum(g, k, b):
    G = to_nx(g)
    return min(nx.k_core(G.subgraph(set(G) - set(W)), k).number_of_nodes()
               for W in combinations(G, b))


@pytest.fixture(scope="module")
def karate_instances(karate):
    return {b: preprocess(Instance(karate, 2, b)) for b in (1, 2, 3)}


@pytest.fixture(scope="module")
def karate_optima(karate_instances):
    return {b: nx_optimum(inst.graph, 2, b) for b, inst in karate_instances.items()}


@pytest.mark.parametrize("b", [1, 2, 3])
@pytest.mark.parametrize("method", ["brute", "bnb", "cutting-plane"])
def test_karate_methods_agree_with_networkx(karate_instances, karate_optima, b, method):
    inst = karate_instances[b]
    res = solve(inst, SolverConfig(method=method))
    assert res.status == "Optimal"
    assert res.best_value == res.proven_lb == karate_optima[b]
    assert len(res.best_w) == b and collapsed_size(inst, res.best_w) == res.best_value


def test_methods_agree_on_random_instances():
    for inst in random_instances(40, (5, 24), (0.15, 0.6), [2, 3, 4], [1, 2, 3]):
        ref = brute_force(inst).best_value
        for flags in FLAG_SETS:
            for method in ("bnb", "cutting-plane"):
                res = solve(inst, SolverConfig(method=method, **flags))
                assert res.status == "Optimal"
                assert res.best_value == ref, (method, flags)
                assert collapsed_size(inst, res.best_w) == ref


def test_budget_larger_than_graph_is_infeasible():
    inst = Instance(clique(4), 3, 5)
    for method in ("brute", "bnb", "cutting-plane"):
        assert solve(inst, SolverConfig(method=method)).status == "Infeasible"


def test_network_can_be_emptied():
    inst = Instance(clique(4), 3, 2)
    for method in ("brute", "bnb", "cutting-plane"):
        assert solve(inst, SolverConfig(method=method)).best_value == 0


def test_zero_budget():
    res = branch_and_bound(Instance(clique(5), 3, 0))
    assert res.best_value == 5 and res.best_w == frozenset()


def test_time_limit_returns_a_feasible_point(karate_instances):
    inst = karate_instances[3]
    m = lower_bound_m(inst).m
    for method in ("bnb", "cutting-plane"):
        res = solve(inst, SolverConfig(method=method, time_limit=0.0))
        assert res.status in ("Feasible", "Optimal")
        assert m <= res.proven_lb <= res.best_value
        assert collapsed_size(inst, res.best_w) == res.best_value
        assert 0 <= res.gap_pct <= 100


def test_master_values_increase(karate_instances):
    res = cutting_plane(karate_instances[2])
    vals = res.master_values
    assert vals == sorted(vals) and vals[-1] == res.best_value
    assert sum(res.cuts_added.values()) == len(res.pool)


def test_solvers_are_deterministic(karate_instances):
    inst = karate_instances[3]
    for method in ("bnb", "cutting-plane"):
        a = solve(inst, SolverConfig(method=method))
        b = solve(inst, SolverConfig(method=method))
        assert (a.best_w, a.nodes_explored, a.cuts_added) == (b.best_w, b.nodes_explored,
                                                                b.cuts_added)


def test_brute_force_ties_break_lexicographically():
    res = brute_force(Instance(clique(6), 2, 2))
    assert res.best_w == {0, 1} and res.best_value == 4


def test_brute_force_cap():
    with pytest.raises(ValueError):
        brute_force(Instance(clique(30), 2, 10), cap=1000)


def test_solvers_need_preprocessing():
    from collapsed_kcore.graph import Graph
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    with pytest.raises(NotPreprocessedError):
        branch_and_bound(Instance(g, 2, 1))


def test_unknown_method():
    with pytest.raises(ValueError):
        SolverConfig(method="simplex")


def test_result_json(karate_instances):
    out = solve(karate_instances[1]).to_json()
    assert out["status"] == "Optimal" and out["value"] == out["lb"]
    assert len(out["set"]) == 1
