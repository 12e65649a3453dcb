from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import linprog

from bfmech.exhaustive import brute_opt
from bfmech.lp import (
    CutLpModel,
    F_value,
    L_value,
    dual_bound,
    opt_f,
    pipage_round,
    random_feasible_point,
    solve_lp,
    verify_pipage_bound,
)
from bfmech.structure import knapsack_to_cut
from bfmech.valuations import CutValuation, Instance
from conftest import cut_instances, k3


def scipy_lp(model):
    """Float LP over (x, z) with the edge constraints written out explicitly."""
    n, edges = model.n, list(model.weights.items())
    m = len(edges)
    c = np.concatenate([np.zeros(n), -np.array([float(w) for _, w in edges])])
    A, b = [], []
    for k, ((i, j), _) in enumerate(edges):
        row = np.zeros(n + m)
        row[n + k], row[i - 1], row[j - 1] = 1, -1, -1
        A.append(row), b.append(0)
        row = np.zeros(n + m)
        row[n + k], row[i - 1], row[j - 1] = 1, 1, 1
        A.append(row), b.append(2)
    A.append(np.concatenate([[float(x) for x in model.costs], np.zeros(m)]))
    b.append(float(model.budget))
    bounds = [(0, 0) if i + 1 in model.fixed_zero else (0, 1) for i in range(n)] + [(0, 1)] * m
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


def test_zero_budget_edge():
    model = CutLpModel(2, {(1, 2): Fraction(1)}, (Fraction(1), Fraction(1)), Fraction(0))
    sol = solve_lp(model, "simplex")
    assert sol.objective == 0 and sol.x == (0, 0)


def test_single_edge():
    model = CutLpModel(2, {(1, 2): Fraction(1)}, (Fraction(1), Fraction(1)), Fraction(1))
    for method in ("hull", "simplex"):
        sol = solve_lp(model, method)
        assert sol.objective == 1
        assert model.feasible(sol.x, sol.z)


def test_k3_above_opt():
    inst = Instance(k3(), (1, 1, 1), Fraction(3, 2))
    assert opt_f(inst, [1, 2, 3]) >= brute_opt(inst)[0] == 2


def test_opt_f_small_sets(k3_inst):
    assert opt_f(k3_inst, []) == 0
    assert opt_f(k3_inst, [2]) == k3_inst.v([2])


def test_model_dump(k3_inst):
    text = CutLpModel.from_instance(k3_inst, [1, 2]).dump()
    assert "maximize" in text and "x3 = 0" in text


def test_integral_point_untouched():
    model = CutLpModel(2, {(1, 2): Fraction(1)}, (Fraction(1), Fraction(1)), Fraction(1))
    state, trace = pipage_round(model, [Fraction(1), Fraction(0)])
    assert trace == [] and state.x == (1, 0)


def test_pipage_half_half():
    model = CutLpModel(2, {(1, 2): Fraction(1)}, (Fraction(1), Fraction(1)), Fraction(1))
    x = [Fraction(1, 2), Fraction(1, 2)]
    assert F_value(model, x) == Fraction(1, 2)
    state, trace = pipage_round(model, x)
    assert state.x in ((1, 0), (0, 1)) and state.F_value == 1


def test_single_edge_large_budget():
    inst = Instance(CutValuation(2, [(1, 2, 3)]), (1, 1), 10)
    rep = verify_pipage_bound(inst)
    assert rep.opt_f == rep.opt == 3 and rep.ratio == 1


def test_knapsack_star_bound():
    rep = verify_pipage_bound(knapsack_to_cut((3, 2), (1, 2), 2))
    assert rep.beta_bound_holds and rep.four_bound_holds


@given(cut_instances(n_max=7))
def test_hull_matches_simplex_and_scipy(inst):
    model = CutLpModel.from_instance(inst, inst.affordable())
    a, b = solve_lp(model, "hull"), solve_lp(model, "simplex")
    assert a.objective == b.objective
    assert model.feasible(a.x, a.z) and model.feasible(b.x, b.z)
    assert L_value(model, a.x) == a.objective
    assert abs(float(a.objective) - scipy_lp(model)) < 1e-6


@given(cut_instances(n_max=7))
def test_dual_certificate_is_tight(inst):
    model = CutLpModel.from_instance(inst, inst.affordable())
    if not model.free:
        return
    sol = solve_lp(model, "hull")
    lam = sol.certificate.get("budget_dual")
    if lam is not None:
        assert dual_bound(model, lam) == sol.objective


@given(cut_instances(n_max=7))
def test_relaxation_and_pipage(inst):
    rep = verify_pipage_bound(inst)
    assert rep.opt <= rep.opt_f
    assert rep.beta_bound_holds and rep.four_bound_holds
    assert rep.pipage_monotone and rep.pipage_final_fractional <= 1
    assert rep.last_coordinate_holds


@given(cut_instances(n_max=6))
def test_F_at_least_half_L(inst):
    model = CutLpModel.from_instance(inst)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = random_feasible_point(model, rng)
        assert 2 * F_value(model, x) >= L_value(model, x)


def test_unknown_method(k3_inst):
    with pytest.raises(ValueError):
        solve_lp(CutLpModel.from_instance(k3_inst), "interior")
