"""Seeded random instance families."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .structure import knapsack_to_cut
from .valuations import (
    AdditiveValuation,
    CutValuation,
    Instance,
    TabularValuation,
    XosValuation,
    as_fraction,
)

FAMILIES = ("erdos-renyi-cut", "star-knapsack", "random-additive", "random-xos", "tabular-symmetric")


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs shared by every family.

    Weights and costs are integers drawn uniformly from the given ranges;
    the budget is ``budget_fraction`` of the total cost.
    """

    edge_prob: float = 0.5
    weight_range: tuple[int, int] = (1, 10)
    cost_range: tuple[int, int] = (1, 10)
    budget_fraction: Fraction = Fraction(1, 3)
    clauses: int = 3
    unit_weights: bool = False


def _costs(rng: np.random.Generator, n: int, p: GeneratorParams) -> list[Fraction]:
    lo, hi = p.cost_range
    return [Fraction(int(c)) for c in rng.integers(lo, hi + 1, size=n)]


def _budget(costs, p: GeneratorParams) -> Fraction:
    B = as_fraction(p.budget_fraction) * sum(costs, Fraction(0))
    return B if B > 0 else Fraction(1)


def erdos_renyi_cut(n: int, rng: np.random.Generator, p: GeneratorParams = GeneratorParams()) -> Instance:
    lo, hi = p.weight_range
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < p.edge_prob:
                w = 1 if p.unit_weights else int(rng.integers(lo, hi + 1))
                edges.append((i, j, w))
    costs = _costs(rng, n, p)
    return Instance(CutValuation(n, edges), tuple(costs), _budget(costs, p))


def star_knapsack(n: int, rng: np.random.Generator, p: GeneratorParams = GeneratorParams()) -> Instance:
    """Knapsack with ``n - 1`` items embedded as a star cut (hub is agent ``n``)."""
    if n < 2:
        raise ValueError("star-knapsack needs n >= 2")
    lo, hi = p.weight_range
    vals = [int(v) for v in rng.integers(lo, hi + 1, size=n - 1)]
    costs = _costs(rng, n - 1, p)
    return knapsack_to_cut(vals, costs, _budget(costs, p))


def random_additive(n: int, rng: np.random.Generator, p: GeneratorParams = GeneratorParams()) -> Instance:
    lo, hi = p.weight_range
    vals = [int(v) for v in rng.integers(lo, hi + 1, size=n)]
    costs = _costs(rng, n, p)
    return Instance(AdditiveValuation(vals), tuple(costs), _budget(costs, p))


def random_xos(n: int, rng: np.random.Generator, p: GeneratorParams = GeneratorParams()) -> Instance:
    lo, hi = p.weight_range
    rows = rng.integers(0, hi + 1, size=(p.clauses, n))
    rows = [[int(x) for x in r] for r in rows]
    if not any(any(r) for r in rows):
        rows[0][0] = max(lo, 1)
    costs = _costs(rng, n, p)
    return Instance(XosValuation(rows), tuple(costs), _budget(costs, p))


def tabular_symmetric(n: int, rng: np.random.Generator, p: GeneratorParams = GeneratorParams()) -> Instance:
    """Random cut function plus ``w * min(|S|, n - |S|)``; symmetric and submodular."""
    cut = erdos_renyi_cut(n, rng, p).valuation
    w = int(rng.integers(0, p.weight_range[1] + 1))
    val = TabularValuation.from_function(
        n, lambda S: cut.value(S) + w * min(len(S), n - len(S)))
    costs = _costs(rng, n, p)
    return Instance(val, tuple(costs), _budget(costs, p))


_BUILDERS = {
    "erdos-renyi-cut": erdos_renyi_cut,
    "star-knapsack": star_knapsack,
    "random-additive": random_additive,
    "random-xos": random_xos,
    "tabular-symmetric": tabular_symmetric,
}


def generate(family: str, n: int, seed: int, params: GeneratorParams = GeneratorParams()) -> Instance:
    if family not in _BUILDERS:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if n < 1:
        raise ValueError("n must be at least 1")
    return _BUILDERS[family](n, np.random.default_rng(seed), params)


def family_stream(family: str, count: int, seed: int, n_range: tuple[int, int],
                  params: GeneratorParams = GeneratorParams()):
    """``count`` instances with sizes drawn from ``n_range``; instance ``k`` depends only on ``(seed, k)``."""
    lo, hi = n_range
    if family == "star-knapsack":
        lo = max(lo, 2)
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        n = int(rng.integers(lo, hi + 1))
        yield _BUILDERS[family](n, rng, params)
