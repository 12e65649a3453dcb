"""Local search followed by enumeration greedy on both sides of the local optimum."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .greedy import greedy_enum_sm
from .local_search import approx_local_search
from .structure import check_submodular, check_symmetric, normalize_costs
from .valuations import Instance, as_fraction

CHECK_CAP = 16


@dataclass(frozen=True)
class LsGreedyReport:
    S: frozenset[int]
    side_values: tuple[Fraction, Fraction]
    sides: tuple[frozenset[int], frozenset[int]]
    chosen: str          # "S" or "complement"
    eps: Fraction


def _integral(inst: Instance) -> Instance:
    den = 1
    for c in inst.costs + (inst.budget,):
        den = den * c.denominator // math.gcd(den, c.denominator)
    if den == 1:
        return inst
    return Instance(inst.valuation, tuple(c * den for c in inst.costs), inst.budget * den,
                    ground=inst.ground, origin=inst.origin)


def _pick(a: frozenset[int], va: Fraction, b: frozenset[int], vb: Fraction) -> bool:
    """True when ``a`` wins: higher value, then lexicographically smaller."""
    if va != vb:
        return va > vb
    return tuple(sorted(a)) <= tuple(sorted(b))


def ls_greedy(inst: Instance, eps) -> tuple[frozenset[int], LsGreedyReport]:
    """Budgeted maximisation of a symmetric submodular function.

    Runs approximate local search with ``eps/4`` and the enumeration greedy
    on the local optimum and on its complement, returning the better set.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if inst.ground != frozenset(range(1, inst.n + 1)):
        raise ValueError("ls_greedy runs on a full instance")
    if inst.valuation.kind == "tabular" and inst.n <= CHECK_CAP:
        if check_symmetric(inst) is not None or check_submodular(inst) is not None:
            raise ValueError("valuation is not symmetric submodular")
    work = _integral(normalize_costs(inst))
    S = approx_local_search(work, eps / 4).S
    comp = work.ground - S
    T1 = greedy_enum_sm(work.restrict(S))
    T2 = greedy_enum_sm(work.restrict(comp))
    v1, v2 = work.v(T1), work.v(T2)
    first = _pick(T1, v1, T2, v2)
    out = work.to_original(T1 if first else T2)
    report = LsGreedyReport(work.to_original(S), (v1, v2),
                            (work.to_original(T1), work.to_original(T2)),
                            "S" if first else "complement", eps)
    return out, report
