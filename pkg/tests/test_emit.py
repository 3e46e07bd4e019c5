from itertools import combinations

import pytest

from collapsed_kcore import Instance, brute_force, collapse, lower_bound_m, preprocess
from collapsed_kcore.emit import (ModelIR, cascade_to_assignment, dual_assignment,
                                  emit_detection_lp, emit_nonlinear_dual, emit_sparse_master,
                                  emit_time_dependent, evaluate_model, master_assignment,
                                  parse_lp_text, write_lp_text)
from collapsed_kcore.inequalities import CutPool, bigm_cut, nogood_cut, hcore_cut
from collapsed_kcore.lp import min_lambda_cap

from conftest import clique, random_instances


@pytest.fixture(scope="module")
def karate2(karate):
    return preprocess(Instance(karate, 2, 2))


def test_time_dependent_counts_on_k4():
    inst = Instance(clique(4), 3, 1)
    m = lower_bound_m(inst).m
    T = 4 - 1 - m
    model = emit_time_dependent(inst)
    assert len(model.variables) == 4 * (T + 1)
    assert len(model.rows_named("onlyremoval_")) == 4 * T
    assert len(model.rows_named("const_one_")) == 4 * T
    assert model.row("budget").rhs == 3 and model.row("budget").sense == "="
    assert all(v.kind == "binary" for v in model.variables)


def test_const_one_row(karate2):
    model = emit_time_dependent(karate2)
    g, k = karate2.graph, karate2.k
    row = model.row("const_one_0_1")
    d = len(g.neighbors(0)) - k + 1
    assert row.coeffs["a_0_1"] == -d and row.coeffs["a_0_0"] == d
    assert row.rhs == d + k - 1
    assert all(row.coeffs[f"a_{j}_0"] == 1 for j in g.neighbors(0))


def test_all_zero_assignment_breaks_the_budget():
    inst = Instance(clique(4), 3, 1)
    model = emit_time_dependent(inst)
    res = evaluate_model(model, {v.name: 0 for v in model.variables})
    assert not res["feasible"]
    assert any(v.startswith("budget") for v in res["violations"])


def test_missing_variables_are_reported():
    model = emit_time_dependent(Instance(clique(4), 3, 1))
    with pytest.raises(KeyError, match="a_0_0"):
        evaluate_model(model, {})


def test_cascade_assignment_on_clique():
    inst = Instance(clique(4), 3, 1)
    T = lower_bound_m(inst).tightened_T
    a = cascade_to_assignment(inst, {0})
    assert [a[f"a_{i}_0"] for i in range(4)] == [0, 1, 1, 1]
    assert [a[f"a_{i}_1"] for i in range(4)] == [0, 0, 0, 0]
    assert all(a[f"a_{i}_{T}"] == 0 for i in range(4))
    res = evaluate_model(emit_time_dependent(inst), a)
    assert res["feasible"] and res["objective"] == 0


def test_cascade_assignment_rejects_short_horizon():
    n = 9
    from collapsed_kcore.graph import Graph
    inst = Instance(Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)]), 2, 1)
    with pytest.raises(ValueError, match="horizon"):
        cascade_to_assignment(inst, {0}, T=2)
    with pytest.raises(ValueError):
        cascade_to_assignment(inst, {0, 1})


def test_every_interdiction_is_feasible_in_the_time_model():
    for inst in random_instances(12, (6, 14), (0.25, 0.6), [2, 3], [1, 2]):
        model = emit_time_dependent(inst)
        opt = brute_force(inst).best_value
        for W in combinations(range(inst.n), inst.b):
            res = evaluate_model(model, cascade_to_assignment(inst, W))
            assert res["feasible"], res["violations"][:3]
            assert res["objective"] == len(collapse(inst, W).survivors) >= opt


def test_cuts_keep_an_optimal_interdiction_feasible():
    for inst in random_instances(12, (6, 14), (0.25, 0.6), [2, 3], [1, 2]):
        model = emit_time_dependent(inst, with_cuts=True)
        opt = brute_force(inst).best_value
        ok = [W for W in combinations(range(inst.n), inst.b)
              if len(collapse(inst, W).survivors) == opt
              and evaluate_model(model, cascade_to_assignment(inst, W))["feasible"]]
        assert ok


def test_cut_rows_carry_the_bound(karate2):
    model = emit_time_dependent(karate2, with_cuts=True)
    T = lower_bound_m(karate2).tightened_T
    row = model.row("lower_bound")
    assert row.sense == ">=" and set(row.coeffs) == {f"a_{i}_{T}" for i in range(karate2.n)}
    assert model.rows_named("Follower_")


def test_sparse_master_rows():
    inst = Instance(clique(6), 3, 1)
    empty = emit_sparse_master(inst)
    assert [r.name for r in empty.rows] == ["budget", "lower_bound"]
    m = lower_bound_m(inst).m
    model = emit_sparse_master(inst, [bigm_cut(inst, range(6), m)])
    row = model.rows[-1]
    assert row.coeffs == {"z": 1, **{f"w_{i}": 6 - m for i in range(6)}}
    assert (row.sense, row.rhs) == (">=", 6)


def test_sparse_master_scales_fractional_cuts():
    inst = Instance(clique(7), 2, 2)
    cut = hcore_cut(inst, range(7), 5, 1)
    model = emit_sparse_master(inst, [cut])
    row = model.rows[-1]
    assert row.coeffs["z"] == 4 and row.rhs == 4 * 4


def test_sparse_master_accepts_the_cascade_point(karate2):
    m = lower_bound_m(karate2).m
    pool = CutPool()
    for W in [(0, 1), (0, 32), (5, 6)]:
        pool.add(nogood_cut(karate2, W, m))
    model = emit_sparse_master(karate2, pool)
    for W in [(0, 1), (0, 32), (2, 3)]:
        assert evaluate_model(model, master_assignment(karate2, W))["feasible"]


def test_linearized_dual_on_k4():
    inst = Instance(clique(4), 3, 1)
    model = emit_nonlinear_dual(inst, linearize=True)
    assert sum(v.name.startswith("p_") for v in model.variables) == 4
    assert len(model.rows_named("mc")) == 12
    assert model.is_linear
    assert model.var("lambda_0").ub == 4


def test_bilinear_dual_terms(karate2):
    model = emit_nonlinear_dual(karate2)
    row = model.row("nonlin")
    assert not model.is_linear
    assert len(row.bilinear) == karate2.n
    deg = karate2.graph.degree
    for i in range(karate2.n):
        if deg[i] != 2:
            assert row.coeffs[f"alpha_{i}"] == -(2 - deg[i])
    with pytest.raises(ValueError):
        write_lp_text(model)


def test_dual_model_at_the_optimum(karate2):
    res = brute_force(karate2)
    n = karate2.n
    for linearize in (False, True):
        model = emit_nonlinear_dual(karate2, linearize=linearize)
        out = evaluate_model(model, dual_assignment(karate2, res.best_w, linearize=linearize))
        assert out["feasible"], out["violations"][:3]
        assert out["objective"] == res.best_value
    chi = [int(i in res.best_w) for i in range(n)]
    assert min_lambda_cap(karate2.graph, 2, chi) <= n


def test_detection_ir():
    model = emit_detection_lp(clique(4), 3, [1, 0, 0, 0])
    assert (model.row("ub_0").coeffs, model.row("ub_0").rhs) == ({"u_0": 1}, 1)
    assert model.row("lin4_0").rhs == 1
    assert parse_lp_text(write_lp_text(model)) == model


def _models(inst):
    m = lower_bound_m(inst).m
    yield emit_time_dependent(inst)
    yield emit_time_dependent(inst, with_cuts=True)
    yield emit_sparse_master(inst, [bigm_cut(inst, range(inst.n), m),
                                    nogood_cut(inst, range(inst.b), m)])
    yield emit_nonlinear_dual(inst, linearize=True, with_cuts=True)
    yield emit_detection_lp(inst.graph, inst.k)


def test_round_trip(karate2):
    for model in _models(karate2):
        text = write_lp_text(model)
        back = parse_lp_text(text)
        assert back == model
        assert write_lp_text(back) == text


def test_emission_is_deterministic(karate):
    a = [write_lp_text(m) for m in _models(preprocess(Instance(karate, 2, 2)))]
    b = [write_lp_text(m) for m in _models(preprocess(Instance(karate, 2, 2)))]
    assert a == b


def test_one_variable_text():
    model = ModelIR(name="tiny")
    model.add_var("x", "integer", 0, 5)
    model.objective = {"x": 1}
    model.add_row("low", {"x": 2}, ">=", 3)
    text = write_lp_text(model)
    assert text == ("\\ tiny\nMinimize\n obj: x\nSubject To\n low: 2 x >= 3\nBounds\n"
                    " 0 <= x <= 5\nGenerals\n x\nEnd\n")
    assert parse_lp_text(text) == model
    assert evaluate_model(model, {"x": 2}) == {"feasible": True, "violations": [],
                                               "objective": 2}
    assert not evaluate_model(model, {"x": 1.5})["feasible"]


def test_objective_constant_round_trips():
    model = ModelIR(name="c", sense="max")
    model.add_var("v", "continuous", -float("inf"), float("inf"))
    model.objective = {"v": -1}
    model.obj_constant = 7
    model.add_row("r", {"v": 1}, "<=", 2)
    text = write_lp_text(model)
    assert "v free" in text and "Maximize" in text
    assert parse_lp_text(text) == model


def test_ir_validation():
    model = ModelIR()
    model.add_var("x")
    with pytest.raises(ValueError):
        model.add_var("x")
    with pytest.raises(KeyError):
        model.add_row("r", {"y": 1}, "<=", 0)
    with pytest.raises(ValueError):
        model.add_var("y", "real")


def test_json_dump(karate2):
    import json
    data = json.loads(emit_sparse_master(karate2).dumps())
    assert data["rows"][0]["name"] == "budget"
    z = next(v for v in data["variables"] if v["name"] == "z")
    assert z == {"name": "z", "kind": "integer", "lb": 0, "ub": karate2.n}
