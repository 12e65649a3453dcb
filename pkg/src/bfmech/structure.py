"""Structural checks on valuations, cost normalisation and the knapsack reduction."""
from __future__ import annotations

import warnings
from typing import NamedTuple, Sequence

import numpy as np

from .valuations import (
    TABLE_CAP,
    AdditiveValuation,
    CutValuation,
    DeskScaleOnly,
    Instance,
    SizeCapExceeded,
    as_fraction,
    from_mask,
)

FULL_PAIR_CHECK = 11


class SubmodularityViolation(NamedTuple):
    S: frozenset
    T: frozenset
    i: int


def _table(inst: Instance) -> np.ndarray:
    n = inst.n
    if n > TABLE_CAP:
        raise SizeCapExceeded(f"exhaustive checks need n <= {TABLE_CAP}, got {n}")
    if n > 16:
        warnings.warn(f"exhaustive check over 2^{n} subsets", DeskScaleOnly, stacklevel=3)
    return np.asarray(inst.valuation.table_scaled())


def _diminishing_returns(t: np.ndarray, n: int) -> SubmodularityViolation | None:
    """First (S, T, i) with S <= T, i not in T and m_S(i) < m_T(i)."""
    size = 1 << n
    masks = np.arange(size)
    best = None
    for i in range(n):
        bit = 1 << i
        marg = t[masks | bit] - t
        # submask minimum of the marginal over sets avoiding i
        big = marg.max() + 1 if size else 0
        f = np.where(masks & bit, big, marg)
        for k in range(n):
            if k == i:
                continue
            kb = 1 << k
            idx = masks[(masks & kb) != 0]
            f[idx] = np.minimum(f[idx], f[idx ^ kb])
        bad = np.nonzero(((masks & bit) == 0) & (f < marg))[0]
        if bad.size:
            T = int(bad[0])
            sub = T
            S = None
            while True:
                if marg[sub] < marg[T] and (S is None or sub < S):
                    S = sub
                if sub == 0:
                    break
                sub = (sub - 1) & T
            cand = (T, S, i + 1)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    T, S, i = best
    return SubmodularityViolation(from_mask(S), from_mask(T), i)


def _alternative_inequality(t: np.ndarray, n: int) -> bool:
    """Check v(T) <= v(S) + sum_{T-S} m_S(i) - sum_{S-T} (v(S|T) - v(S|T - i))."""
    size = 1 << n
    masks = np.arange(size)
    if n <= FULL_PAIR_CHECK:
        for S in range(size):
            rhs = np.full(size, t[S], dtype=t.dtype)
            union = masks | S
            for i in range(n):
                bit = 1 << i
                if S & bit:
                    drop = (masks & bit) == 0
                    rhs = rhs - np.where(drop, t[union] - t[union & ~bit], 0)
                else:
                    add = (masks & bit) != 0
                    rhs = rhs + np.where(add, t[S | bit] - t[S], 0)
            if np.any(t > rhs):
                return False
        return True
    # pairs T = S + {i, j}: the inequality reduces to its local form
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            S = masks[(masks & (bi | bj)) == 0]
            if np.any(t[S | bi | bj] > t[S | bi] + t[S | bj] - t[S]):
                return False
    return True


def check_submodular(inst: Instance) -> SubmodularityViolation | None:
    """Exhaustively test submodularity; ``None`` means it holds.

    Both the diminishing-returns definition and the alternative inequality
    over pairs of sets are evaluated; they must agree.
    """
    t = _table(inst)
    n = inst.n
    dr = _diminishing_returns(t, n)
    alt_ok = _alternative_inequality(t, n)
    if (dr is None) != alt_ok:
        raise RuntimeError("submodularity criteria disagree")
    return dr


def check_symmetric(inst: Instance) -> frozenset | None:
    """First non-empty S (by mask) with v(S) != v(A - S), or ``None``."""
    t = _table(inst)
    full = (1 << inst.n) - 1
    masks = np.arange(1, full + 1)
    bad = np.nonzero(t[masks] != t[full ^ masks])[0]
    if bad.size:
        return from_mask(int(masks[bad[0]]))
    return None


def normalize_costs(inst: Instance) -> Instance:
    """Merge all agents with cost above the budget into one agent of cost ``B + 1``.

    The merged agent is numbered last; ``origin`` maps each new agent back to
    the original agents it represents.
    """
    if inst.ground != frozenset(range(1, inst.n + 1)):
        raise ValueError("normalize the full instance, not a restricted view")
    B = inst.budget
    expensive = [i for i in range(1, inst.n + 1) if inst.cost(i) > B]
    if len(expensive) <= 1:
        return inst
    keep = [i for i in range(1, inst.n + 1) if inst.cost(i) <= B]
    val = inst.valuation.merged(keep, expensive)
    costs = [inst.cost(i) for i in keep] + [B + 1]
    base_origin = inst.origin or tuple((i,) for i in range(1, inst.n + 1))
    origin = tuple(base_origin[i - 1] for i in keep)
    origin += (tuple(a for i in expensive for a in base_origin[i - 1]),)
    return Instance(val, tuple(costs), B, origin=origin)


def knapsack_to_cut(values: Sequence[object], costs: Sequence[object], budget) -> Instance:
    """Star graph whose budgeted cut optimum equals the knapsack optimum.

    Item ``i`` becomes vertex ``i``; the hub is vertex ``n + 1`` with cost
    ``B + 1`` and edge ``(i, hub)`` carries the item's value.
    """
    if len(values) != len(costs):
        raise ValueError("values and costs differ in length")
    vals = [as_fraction(v) for v in values]
    cs = [as_fraction(c) for c in costs]
    if any(v < 0 for v in vals) or any(c < 0 for c in cs):
        raise ValueError("values and costs must be non-negative")
    B = as_fraction(budget)
    hub = len(vals) + 1
    val = CutValuation(hub, [(i + 1, hub, v) for i, v in enumerate(vals)])
    return Instance(val, tuple(cs) + (B + 1,), B)


def knapsack_instance(values: Sequence[object], costs: Sequence[object], budget) -> Instance:
    return Instance(AdditiveValuation(values), tuple(costs), budget)


__all__ = [
    "SubmodularityViolation",
    "check_submodular",
    "check_symmetric",
    "normalize_costs",
    "knapsack_to_cut",
    "knapsack_instance",
]
