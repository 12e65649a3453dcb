from fractions import Fraction

import pytest
from hypothesis import given

from bfmech.valuations import (
    AdditiveValuation,
    CutValuation,
    Instance,
    TabularValuation,
    XosValuation,
    marginal,
    value,
)
from conftest import cut_instances, k3, naive_value, subsets, xos_instances


def test_k3_values(k3_inst):
    assert value(k3_inst, []) == 0
    assert value(k3_inst, [1]) == 2
    assert value(k3_inst, [1, 2, 3]) == 0


def test_marginals(k3_inst, add641):
    assert marginal(k3_inst, [], 1) == 2
    assert marginal(k3_inst, [2, 3], 1) == -2
    assert marginal(add641, [1], 2) == 4


def test_marginal_rejects_member(k3_inst):
    with pytest.raises(ValueError):
        marginal(k3_inst, [1], 1)


def test_unknown_agent(k3_inst):
    with pytest.raises((KeyError, ValueError)):
        value(k3_inst, [4])


def test_query_counter():
    v = k3()
    v.reset_queries()
    v.value([1])
    v.value([1, 2])
    assert v.queries == 2
    v.reset_queries()
    assert v.queries == 0


def test_rational_weights():
    v = CutValuation(2, [(1, 2, "1/3")])
    assert v.value([2]) == Fraction(1, 3)


def test_instance_validation():
    with pytest.raises(ValueError):
        Instance(k3(), (1, 1), 1)
    with pytest.raises(ValueError):
        Instance(k3(), (1, -1, 1), 1)
    with pytest.raises(ValueError):
        Instance(k3(), (1, 1, 1), 0)


def test_tabular_rejects_nonzero_empty():
    with pytest.raises(ValueError):
        TabularValuation([1, 2])


def test_xos_negative_clause():
    with pytest.raises(ValueError):
        XosValuation([[1, -1]])


def test_restrict_keeps_costs(k3_inst):
    J = k3_inst.restrict([1, 2])
    assert J.agents == [1, 2] and J.costs == k3_inst.costs
    assert J.affordable() == [1, 2]


@given(cut_instances(n_max=6))
def test_cut_symmetric_and_matches_definition(inst):
    A = frozenset(inst.agents)
    for S in subsets(A):
        assert inst.v(S) == naive_value(inst.valuation, S)
        assert inst.v(S) == inst.v(A - S)


@given(xos_instances())
def test_xos_matches_definition(inst):
    for S in subsets(inst.agents):
        assert inst.v(S) == naive_value(inst.valuation, S)


def test_additive_table():
    v = AdditiveValuation([6, 4, 1])
    assert [int(x) for x in v.table_scaled()] == [0, 6, 4, 10, 1, 7, 5, 11]
