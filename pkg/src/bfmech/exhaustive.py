"""Exhaustive optimisation over subsets (desk-scale ground truth)."""
from __future__ import annotations

import math
import warnings
from fractions import Fraction
from typing import Iterable

import numpy as np

from .valuations import DeskScaleOnly, Instance, SizeCapExceeded, _bits

OPT_CAP = 24


def _subset_arrays(inst: Instance, X: list[int], costs) -> tuple[np.ndarray, np.ndarray, int]:
    """Global masks and scaled costs for all subsets of X, plus the cost scale."""
    den = 1
    for i in X:
        d = costs[i - 1].denominator
        den = den * d // math.gcd(den, d)
    ints = [int(costs[i - 1] * den) for i in X]
    dt = np.int64 if (sum(ints) + 1) < (1 << 62) else object
    gm = np.zeros(1, dtype=np.int64)
    cm = np.zeros(1, dtype=dt)
    for i, c in zip(X, ints):
        gm = np.concatenate([gm, gm | (1 << (i - 1))])
        cm = np.concatenate([cm, cm + c])
    return gm, cm, den


def brute_opt(inst: Instance, X: Iterable[int] | None = None, budget=None,
              unconstrained: bool = False) -> tuple[Fraction, frozenset[int]]:
    """``max v(S)`` over ``S <= X`` with ``c(S) <= B`` (or no budget).

    Ties go to the lexicographically smallest sorted agent tuple.
    """
    X = sorted(inst.ground if X is None else frozenset(X))
    if len(X) > OPT_CAP:
        raise SizeCapExceeded(f"brute force needs |X| <= {OPT_CAP}, got {len(X)}")
    if len(X) > 20:
        warnings.warn(f"enumerating 2^{len(X)} subsets", DeskScaleOnly, stacklevel=2)
    B = inst.budget if budget is None else budget
    gm, cm, den = _subset_arrays(inst, X, inst.costs)
    table = np.asarray(inst.valuation.table_scaled())
    vals = table[gm]
    if unconstrained or B is None:
        ok = np.ones(len(gm), dtype=bool)
    else:
        lim = Fraction(B) * den
        lim = math.floor(lim)
        ok = np.asarray(cm <= lim, dtype=bool)
    inst.valuation._count(len(gm))
    feas_vals = vals[ok]
    best = feas_vals.max()
    winners = gm[ok][feas_vals == best]
    best_set = min((tuple(_bits(int(m))) for m in winners))
    return Fraction(int(best), inst.valuation.scale), frozenset(best_set)


def opt_value(inst: Instance, X: Iterable[int] | None = None, budget=None) -> Fraction:
    return brute_opt(inst, X, budget)[0]


def feasible_profile(inst: Instance) -> dict[frozenset[int], Fraction]:
    """Every budget-feasible subset of the ground set with its value."""
    X = inst.agents
    gm, cm, den = _subset_arrays(inst, X, inst.costs)
    ok = np.asarray(cm <= math.floor(inst.budget * den), dtype=bool)
    out = {}
    for m in gm[ok]:
        S = frozenset(_bits(int(m)))
        out[S] = inst.v(S)
    return out


