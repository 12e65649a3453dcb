"""Density greedy engines: the budget-fraction greedy and the 3-set enumeration greedy."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .valuations import Instance, as_fraction, from_mask

_INF, _FINITE, _NEG_INF = 2, 1, 0


def density_key(marg: Fraction, cost: Fraction) -> tuple:
    """Sort key for ``marg / cost``; zero costs map to +inf, 0 or -inf."""
    if cost > 0:
        return (_FINITE, marg / cost)
    if marg > 0:
        return (_INF, 0)
    if marg == 0:
        return (_FINITE, Fraction(0))
    return (_NEG_INF, 0)


def _argmax_density(inst: Instance, S: int, vS: Fraction, remaining: Iterable[int]):
    best = None
    for j in remaining:
        m = inst.v_mask(S | 1 << (j - 1)) - vS
        key = density_key(m, inst.costs[j - 1])
        if best is None or key > best[0]:
            best = (key, j, m)
    return best


@dataclass
class GreedyTrace:
    """Steps of a greedy run.

    ``accepted`` holds ``(t, agent, density)`` triples. ``hints`` maps each
    agent to bids at which one of its comparisons would flip; the payment
    engine uses them to snap thresholds to exact values.
    """

    order: list[int]
    accepted: list[tuple[int, int, object]]
    final_set: frozenset[int]
    budget_fraction: Fraction
    hints: dict[int, set[Fraction]] = field(default_factory=dict)


def _note_breakevens(inst: Instance, S: int, vS: Fraction, chosen: int, m_k: Fraction,
                     remaining: Iterable[int], hints: dict[int, set[Fraction]]) -> None:
    c_k = inst.costs[chosen - 1]
    for j in remaining:
        if j == chosen:
            continue
        m_j = inst.v_mask(S | 1 << (j - 1)) - vS
        if m_j > 0 and m_k > 0:
            hints.setdefault(j, set()).add(m_j * c_k / m_k)
            hints.setdefault(chosen, set()).add(m_k * inst.costs[j - 1] / m_j)


def greedy_sm(inst: Instance, budget_arg, record_hints: bool = False) -> tuple[frozenset[int], GreedyTrace]:
    """Greedy by marginal density that stops at the first agent failing
    ``v(S+k) > v(S)`` and ``c_k <= beta * (v(S+k) - v(S)) / v(S+k)``."""
    beta = as_fraction(budget_arg)
    if beta <= 0:
        raise ValueError("budget_arg must be positive")
    remaining = list(inst.agents)
    S, vS = 0, Fraction(0)
    order: list[int] = []
    accepted = []
    hints: dict[int, set[Fraction]] = {}
    t = 0
    while remaining:
        key, k, m = _argmax_density(inst, S, vS, remaining)
        order.append(k)
        if record_hints:
            _note_breakevens(inst, S, vS, k, m, remaining, hints)
        v_new = vS + m
        if m > 0:
            bound = beta * m / v_new
            if record_hints:
                hints.setdefault(k, set()).add(bound)
            ok = inst.costs[k - 1] <= bound
        else:
            ok = False
        if not ok:
            break
        t += 1
        accepted.append((t, k, key[1] if key[0] == _FINITE else float("inf")))
        S |= 1 << (k - 1)
        vS = v_new
        remaining.remove(k)
    final = from_mask(S)
    return final, GreedyTrace(order, accepted, final, beta, hints)


def resort_order(inst: Instance, bids=None) -> list[int]:
    """Full adaptive density order: position ``t`` maximises the marginal
    density against the first ``t - 1`` agents; ties go to the lowest index."""
    if bids is not None:
        inst = inst.with_costs(bids)
    remaining = list(inst.agents)
    S, vS = 0, Fraction(0)
    order = []
    while remaining:
        _, k, m = _argmax_density(inst, S, vS, remaining)
        order.append(k)
        S |= 1 << (k - 1)
        vS += m
        remaining.remove(k)
    return order


def _best_small(inst: Instance) -> tuple[Fraction, frozenset[int]]:
    best_v, best_S = Fraction(0), frozenset()
    agents = inst.agents
    B = inst.budget
    for r in (1, 2, 3):
        for U in combinations(agents, r):
            if inst.total_cost(U) > B:
                continue
            val = inst.v(U)
            if val > best_v:
                best_v, best_S = val, frozenset(U)
    return best_v, best_S


def greedy_enum_sm(inst: Instance) -> frozenset[int]:
    """Best feasible set of size at most 3, or the best density greedy
    completion of a feasible 3-set; rejected agents are skipped and the
    scan continues."""
    B = inst.budget
    agents = inst.agents
    v1, S1 = _best_small(inst)
    v2, S2 = Fraction(0), frozenset()
    for U in combinations(agents, 3):
        cost = inst.total_cost(U)
        if cost > B:
            continue
        T = 0
        for i in U:
            T |= 1 << (i - 1)
        vT = inst.v_mask(T)
        rest = [a for a in agents if a not in U]
        while rest:
            key, i, m = _argmax_density(inst, T, vT, rest)
            if key[0] != _NEG_INF and key[1] >= 0 and cost + inst.costs[i - 1] <= B:
                T |= 1 << (i - 1)
                vT += m
                cost += inst.costs[i - 1]
            rest.remove(i)
        if vT > v2:
            v2, S2 = vT, from_mask(T)
    return S1 if v1 >= v2 else S2
