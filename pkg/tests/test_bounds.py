import numpy as np
import pytest

from collapsed_kcore import (Instance, collapse, collapsed_size, greedy_upper_bound, kcore,
                             lower_bound_m, preprocess)
from collapsed_kcore.solver import brute_force

from conftest import clique, random_instances


def test_clique_bound():
    info = lower_bound_m(Instance(clique(10), 3, 2))
    assert (info.h, info.hcore_size, info.m) == (5, 10, 8)
    assert info.tightened_T == 10 - 2 - 8
    assert info.to_json() == {"m": 8, "h": 5, "hcore_size": 10, "tightened_T": 0}


def test_karate_bound_is_zero(karate):
    info = lower_bound_m(preprocess(Instance(karate, 2, 3)))
    assert info.h == 5 and info.hcore_size == 0 and info.m == 0


def test_bound_clamps_at_zero():
    # the 4-core of K5 has 5 nodes, fewer than... a budget of 7
    assert lower_bound_m(Instance(clique(5), 1, 3)).m == 2
    assert lower_bound_m(Instance(clique(5), 1, 7)).m == 0


@pytest.mark.parametrize("k", [2, 3])
def test_greedy_on_cliques(k):
    assert greedy_upper_bound(Instance(clique(k + 1), k, 1))[1] == 0
    assert greedy_upper_bound(Instance(clique(k + 2), k, 1))[1] == k + 1


def test_greedy_pads_when_network_empties():
    w, v = greedy_upper_bound(Instance(clique(4), 3, 3))
    assert v == 0 and len(w) == 3


def test_greedy_rejects_oversized_budget():
    with pytest.raises(ValueError):
        greedy_upper_bound(Instance(clique(4), 3, 5))


def test_greedy_single_pick_is_the_best_single_removal(karate):
    inst = preprocess(Instance(karate, 2, 1))
    best = min(collapsed_size(inst, {u}) for u in range(inst.n))
    assert greedy_upper_bound(inst)[1] == best


def test_bounds_bracket_the_optimum():
    for inst in random_instances(40, (6, 26), (0.15, 0.5), [2, 3], [1, 2, 3]):
        opt = brute_force(inst).best_value
        w, g = greedy_upper_bound(inst)
        assert lower_bound_m(inst).m <= opt <= g
        assert len(w) == inst.b and collapsed_size(inst, w) == g


def test_any_b_subset_of_the_hcore_is_safe(rng):
    for inst in random_instances(20, (10, 30), (0.3, 0.7), [2, 3], [1, 2, 3]):
        info = lower_bound_m(inst)
        hcore = sorted(kcore(inst.graph, info.h))
        if len(hcore) < inst.b:
            continue
        for _ in range(50):
            w = rng.choice(hcore, inst.b, replace=False)
            assert collapsed_size(inst, w) >= info.m


def test_optimal_cascades_fit_the_horizon():
    for inst in random_instances(30, (6, 22), (0.15, 0.5), [2, 3], [1, 2]):
        res = brute_force(inst)
        assert collapse(inst, res.best_w).rounds <= lower_bound_m(inst).tightened_T


@pytest.mark.parametrize("k,b,c", [(2, 1, 1), (2, 3, 2), (3, 2, 1), (4, 1, 3)])
def test_bound_is_exact_on_large_cliques(k, b, c):
    inst = Instance(clique(k + b + c), k, b)
    assert lower_bound_m(inst).m == brute_force(inst).best_value == k + c
