from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import settings, strategies as st

from bfmech.valuations import AdditiveValuation, CutValuation, Instance, XosValuation

settings.register_profile("suite", max_examples=40, deadline=None)
settings.load_profile("suite")


def k3():
    return CutValuation(3, [(1, 2, 1), (1, 3, 1), (2, 3, 1)])


def path3():
    return CutValuation(3, [(1, 2, 1), (2, 3, 1)])


@pytest.fixture
def k3_inst():
    return Instance(k3(), (1, 1, 1), 1)


@pytest.fixture
def add641():
    return Instance(AdditiveValuation([6, 4, 1]), (2, 2, 1), 4)


def subsets(agents):
    agents = sorted(agents)
    for r in range(len(agents) + 1):
        yield from (frozenset(c) for c in combinations(agents, r))


def naive_value(val, S):
    """Value straight from the definition, without tables or masks."""
    S = frozenset(S)
    if isinstance(val, CutValuation):
        return sum((w for (i, j), w in val.weights.items() if (i in S) != (j in S)), Fraction(0))
    if isinstance(val, AdditiveValuation):
        return sum((val.values[i - 1] for i in S), Fraction(0))
    if isinstance(val, XosValuation):
        return max(sum((row[i - 1] for i in S), Fraction(0)) for row in val.clauses)
    return val.value(S)


def naive_opt(inst, X=None, budget=None):
    X = inst.ground if X is None else X
    B = inst.budget if budget is None else budget
    return max(naive_value(inst.valuation, S) for S in subsets(X) if inst.total_cost(S) <= B)


@st.composite
def cut_instances(draw, n_min=1, n_max=7, unit=False):
    n = draw(st.integers(n_min, n_max))
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            w = draw(st.integers(0, 1 if unit else 6))
            if w:
                edges.append((i, j, w))
    costs = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n))
    B = Fraction(draw(st.integers(1, 20)), draw(st.integers(1, 3)))
    return Instance(CutValuation(n, edges), tuple(costs), B)


@st.composite
def additive_instances(draw, n_min=1, n_max=7):
    n = draw(st.integers(n_min, n_max))
    vals = draw(st.lists(st.integers(0, 12), min_size=n, max_size=n))
    costs = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n))
    B = Fraction(draw(st.integers(1, 20)), draw(st.integers(1, 2)))
    return Instance(AdditiveValuation(vals), tuple(costs), B)


@st.composite
def xos_instances(draw, n_min=1, n_max=5):
    n = draw(st.integers(n_min, n_max))
    r = draw(st.integers(1, 3))
    rows = [draw(st.lists(st.integers(0, 9), min_size=n, max_size=n)) for _ in range(r)]
    costs = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n))
    B = Fraction(draw(st.integers(1, 20)))
    return Instance(XosValuation(rows), tuple(costs), B)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
