"""Approximate local search for unconstrained maximisation, plus local-optimum verifiers."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .valuations import Instance, as_fraction, to_mask, from_mask

DEFAULT_MOVE_CAP = 10**6
VERIFY_CAP = 20


class IterationCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class LocalSearchResult:
    S: frozenset[int]
    eps: Fraction
    iterations: int
    oracle_queries: int
    exact: bool


class LocalMove(NamedTuple):
    agent: int
    move: str          # "add" or "remove"
    value: Fraction    # value after the move
    bound: Fraction    # (1 + eps/n^2) * v(S)


class MonotonicityViolation(NamedTuple):
    T: frozenset
    T_prime: frozenset


class QuasiMonotoneViolation(NamedTuple):
    T: frozenset
    i: int
    marginal: Fraction


def approx_local_search(inst: Instance, eps=0, max_moves: int = DEFAULT_MOVE_CAP) -> LocalSearchResult:
    """Start from the best singleton and apply improving single-agent moves.

    A move is improving when it raises the value above ``(1 + eps/n^2) v(S)``.
    Agents are scanned in increasing order and the first improving move is
    taken, so the run is deterministic.
    """
    eps = as_fraction(eps)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    agents = inst.agents
    n = len(agents)
    if n == 0:
        raise ValueError("local search needs at least one agent")
    val = inst.valuation
    q0 = val.queries
    factor = 1 + eps / (n * n)

    singles = [inst.v_mask(1 << (i - 1)) for i in agents]
    best = agents[singles.index(max(singles))]
    S = 1 << (best - 1)
    vS = inst.v_mask(S)
    moves = 0
    while True:
        bound = factor * vS
        for a in agents:
            bit = 1 << (a - 1)
            cand = S ^ bit
            vc = inst.v_mask(cand)
            if vc > bound:
                S, vS = cand, vc
                moves += 1
                break
        else:
            break
        if moves >= max_moves:
            raise IterationCapExceeded(
                f"no local optimum after {moves} moves (eps={eps}); exact local search has no running-time bound")
    return LocalSearchResult(from_mask(S), eps, moves, val.queries - q0, eps == 0)


def _violation(inst: Instance, S: int, eps: Fraction) -> LocalMove | None:
    n = len(inst.ground)
    vS = inst.v_mask(S)
    bound = (1 + eps / (n * n)) * vS
    for a in inst.agents:
        bit = 1 << (a - 1)
        vc = inst.v_mask(S ^ bit)
        if vc > bound:
            return LocalMove(a, "remove" if S & bit else "add", vc, bound)
    return None


def verify_approx_local_opt(inst: Instance, S: Iterable[int], eps=0) -> LocalMove | None:
    """Return an improving move out of ``S`` or ``None`` if ``S`` is a local optimum.

    For cut valuations the complement is checked too and must agree.
    """
    eps = as_fraction(eps)
    m = to_mask(S, inst.n)
    found = _violation(inst, m, eps)
    if inst.valuation.kind == "cut" and inst.ground == frozenset(range(1, inst.n + 1)):
        other = _violation(inst, inst.ground_mask ^ m, eps)
        if (found is None) != (other is None):
            raise RuntimeError("a set and its complement disagree on local optimality")
    return found


def _submasks(X: list[int]) -> np.ndarray:
    gm = np.zeros(1, dtype=np.int64)
    for i in X:
        gm = np.concatenate([gm, gm | (1 << (i - 1))])
    return gm


def verify_restricted_monotone(inst: Instance, S: Iterable[int]) -> MonotonicityViolation | None:
    """Check that ``v`` is non-decreasing on the subsets of an exact local optimum ``S``."""
    S = sorted(frozenset(S))
    if len(S) > VERIFY_CAP:
        raise ValueError(f"|S| must be at most {VERIFY_CAP}")
    if verify_approx_local_opt(inst, S, 0) is not None:
        raise ValueError("S is not an exact local optimum")
    t = np.asarray(inst.valuation.table_scaled())
    gm = _submasks(S)
    for i in S:
        bit = 1 << (i - 1)
        T = gm[(gm & bit) == 0]
        bad = np.nonzero(t[T] > t[T | bit])[0]
        if bad.size:
            Tm = int(T[bad[0]])
            return MonotonicityViolation(from_mask(Tm), from_mask(Tm | bit))
    return None


def verify_quasi_monotone(inst: Instance, X: Iterable[int], eps, opt_X_B) -> QuasiMonotoneViolation | None:
    """Check ``v(T + i) - v(T) >= -(eps/n) * opt(X, B)`` for all ``T`` strictly inside ``X``."""
    X = sorted(frozenset(X))
    if len(X) > VERIFY_CAP:
        raise ValueError(f"|X| must be at most {VERIFY_CAP}")
    eps = as_fraction(eps)
    floor = -(eps / inst.n) * as_fraction(opt_X_B)
    t = np.asarray(inst.valuation.table_scaled())
    scale = inst.valuation.scale
    gm = _submasks(X)
    lim = floor * scale
    for i in X:
        bit = 1 << (i - 1)
        T = gm[(gm & bit) == 0]
        marg = t[T | bit] - t[T]
        if lim.denominator != 1:
            marg_cmp = marg.astype(object) * lim.denominator
        else:
            marg_cmp = marg
        bad = np.nonzero(marg_cmp < lim.numerator)[0]
        if bad.size:
            Tm = int(T[bad[0]])
            return QuasiMonotoneViolation(from_mask(Tm), i, Fraction(int(marg[bad[0]]), scale))
    return None
