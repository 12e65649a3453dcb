from fractions import Fraction

from hypothesis import given

from bfmech.exhaustive import brute_opt
from bfmech.greedy import greedy_enum_sm, greedy_sm, resort_order
from bfmech.mechanisms import best_singleton
from bfmech.valuations import AdditiveValuation, Instance, TabularValuation
from conftest import additive_instances, cut_instances, naive_opt


def naive_greedy_sm(inst, beta):
    """Independent restatement of the stopping rule."""
    S, rest = [], list(inst.agents)
    while rest:
        def key(j):
            m = inst.v(S + [j]) - inst.v(S)
            c = inst.cost(j)
            if c == 0:
                return (2 if m > 0 else (1 if m == 0 else 0), Fraction(0), -j)
            return (1, m / c, -j)
        k = max(rest, key=key)
        m = inst.v(S + [k]) - inst.v(S)
        if not (m > 0 and inst.cost(k) <= beta * m / inst.v(S + [k])):
            break
        S.append(k)
        rest.remove(k)
    return frozenset(S)


def test_hand_trace(add641):
    S, tr = greedy_sm(add641, 2)
    assert S == frozenset({1})
    assert tr.order == [1, 2]
    assert tr.accepted == [(1, 1, Fraction(3))]


def test_zero_valuation():
    inst = Instance(TabularValuation([0] * 4), (1, 1), 4)
    assert greedy_sm(inst, 2)[0] == frozenset()


def test_single_agent():
    inst = Instance(AdditiveValuation([5]), (1,), 4)
    assert greedy_sm(inst, 2)[0] == frozenset({1})


def test_resort_order(add641):
    assert resort_order(add641) == [1, 2, 3]
    inst = Instance(AdditiveValuation([2, 2, 0]), (1, 1, 1), 4)
    assert resort_order(inst) == [1, 2, 3]


def test_zero_cost_first():
    inst = Instance(AdditiveValuation([1, 5, 3]), (2, 1, 0), 4)
    assert resort_order(inst)[0] == 3


@given(additive_instances(n_max=7))
def test_matches_naive_restatement(inst):
    assert greedy_sm(inst, inst.budget / 2)[0] == naive_greedy_sm(inst, inst.budget / 2)


@given(cut_instances(n_max=6))
def test_matches_naive_restatement_cut(inst):
    assert greedy_sm(inst, inst.budget / 2)[0] == naive_greedy_sm(inst, inst.budget / 2)


@given(additive_instances(n_max=7))
def test_greedy_value_bound_monotone(inst):
    S, _ = greedy_sm(inst, inst.budget / 2)
    i = best_singleton(inst)
    vi = inst.v([i]) if i else 0
    assert 3 * inst.v(S) + 2 * vi >= brute_opt(inst)[0]


@given(additive_instances(n_max=7))
def test_monotone_under_lower_bids(inst):
    S, _ = greedy_sm(inst, inst.budget / 2)
    for i in S:
        c = inst.cost(i)
        for k in range(8):
            b = c * k / 8
            assert i in greedy_sm(inst.with_cost(i, b), inst.budget / 2)[0]


def test_enum_small_is_exact():
    inst = Instance(AdditiveValuation([3, 2, 2]), (2, 1, 1), 2)
    assert inst.v(greedy_enum_sm(inst)) == naive_opt(inst) == 4


@given(additive_instances(n_max=8))
def test_enum_monotone_ratio(inst):
    S = greedy_enum_sm(inst)
    assert inst.total_cost(S) <= inst.budget
    e = 2.718281828459045
    assert float(inst.v(S)) >= (1 - 1 / e) * float(brute_opt(inst)[0]) - 1e-9


@given(cut_instances(n_max=7))
def test_enum_feasible_on_cut(inst):
    S = greedy_enum_sm(inst)
    assert inst.total_cost(S) <= inst.budget
