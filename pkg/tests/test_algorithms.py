from fractions import Fraction

import pytest
from hypothesis import given

from bfmech.algorithms import ls_greedy
from bfmech.exhaustive import brute_opt
from bfmech.structure import knapsack_to_cut
from bfmech.valuations import AdditiveValuation, CutValuation, Instance, TabularValuation
from conftest import cut_instances

# (e - 1) / (2e), rounded up so the check is never looser than the real constant
HALF_GAP = Fraction(31607, 100000)


def test_k3(k3_inst):
    S, rep = ls_greedy(k3_inst, Fraction(1, 10))
    assert k3_inst.v(S) == 2 == brute_opt(k3_inst)[0]
    assert rep.chosen in ("S", "complement")
    assert max(rep.side_values) == k3_inst.v(S)


def test_single_agent():
    inst = Instance(CutValuation(1), (1,), 2)
    S, _ = ls_greedy(inst, Fraction(1, 2))
    assert S == frozenset() or S == frozenset({1})


def test_rejects_non_symmetric():
    inst = Instance(TabularValuation([0, 1, 1, 1]), (1, 1), 1)
    with pytest.raises(ValueError):
        ls_greedy(inst, Fraction(1, 10))


def test_rejects_bad_eps(k3_inst):
    with pytest.raises(ValueError):
        ls_greedy(k3_inst, 0)


def test_star_maps_back_through_normalisation():
    inst = knapsack_to_cut((3, 2, 4), (1, 2, 5), 2)
    inst = Instance(inst.valuation, inst.costs[:2] + (9, 9), 2)
    S, _ = ls_greedy(inst, Fraction(1, 10))
    assert S <= frozenset(range(1, 5))
    assert inst.total_cost(S) <= inst.budget


@given(cut_instances(n_max=8))
def test_ratio_and_feasibility(inst):
    eps = Fraction(1, 10)
    S, _ = ls_greedy(inst, eps)
    assert inst.total_cost(S) <= inst.budget
    assert inst.v(S) >= (HALF_GAP - eps) * brute_opt(inst)[0]


@given(cut_instances(n_max=6))
def test_deterministic(inst):
    assert ls_greedy(inst, Fraction(1, 5))[0] == ls_greedy(inst, Fraction(1, 5))[0]
