"""Threshold (Myerson) payments for monotone allocation rules."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable

from .valuations import Instance


class NonMonotoneDetected(RuntimeError):
    """A winner lost at some bid and won again at a higher one."""


@dataclass
class Allocation:
    """Outcome of one deterministic allocation rule run.

    ``hints`` maps agents to bids where one of the rule's comparisons
    involving that agent flips; they are candidate thresholds.
    """

    winners: frozenset[int]
    branch: str
    hints: dict[int, set[Fraction]] = field(default_factory=dict)

    def add_hint(self, agent: int, value) -> None:
        self.hints.setdefault(agent, set()).add(Fraction(value))

    def merge_hints(self, other: dict[int, set[Fraction]]) -> None:
        for a, vals in other.items():
            self.hints.setdefault(a, set()).update(vals)


Rule = Callable[[Instance], Allocation]

DEFAULT_BITS = 40


class PaymentEngine:
    """Computes ``sup{b : i wins at (b, b_-i)}`` by candidate search and bisection.

    Thresholds only depend on the other agents' bids, so they are memoised
    on ``(rule key, agent, b_-i)``.
    """

    def __init__(self, bits: int = DEFAULT_BITS):
        self.bits = bits
        self._cache: dict[Hashable, Fraction] = {}
        self.runs = 0

    def _probe(self, rule: Rule, inst: Instance, i: int, b: Fraction, cands: set[Fraction]) -> bool:
        self.runs += 1
        alloc = rule(inst.with_cost(i, b))
        cands.update(alloc.hints.get(i, ()))
        return i in alloc.winners

    def threshold(self, rule: Rule, inst: Instance, i: int, key: Hashable = None,
                  first: Allocation | None = None) -> Fraction:
        bid = inst.cost(i)
        ck = None
        if key is not None:
            others = inst.costs[:i - 1] + (None,) + inst.costs[i:]
            ck = (key, i, others)
            hit = self._cache.get(ck)
            if hit is not None:
                return hit
        B = inst.budget
        cands: set[Fraction] = {B}
        if first is None:
            first = rule(inst)
        cands.update(first.hints.get(i, ()))
        if i not in first.winners:
            raise ValueError(f"agent {i} does not win at its bid")
        lo, hi = bid, B + 1
        wins, loses = {lo}, set()
        if self._probe(rule, inst, i, hi, cands):
            raise NonMonotoneDetected(f"agent {i} still wins at bid B + 1")
        loses.add(hi)
        step = Fraction(1, 1 << self.bits)

        def probe(b: Fraction) -> bool:
            w = self._probe(rule, inst, i, b, cands)
            (wins if w else loses).add(b)
            if wins and loses and max(wins) >= min(loses):
                raise NonMonotoneDetected(
                    f"agent {i}: loses at {min(loses)} but wins at {max(wins)}")
            return w

        while True:
            lo, hi = max(wins), min(loses)
            inner = sorted(c for c in cands if lo < c < hi)
            if inner:
                probe(inner[len(inner) // 2])
                continue
            claim = None
            if lo in cands and hi in cands:
                claim = hi if probe((lo + hi) / 2) else lo
            elif hi in cands:
                claim = hi
            elif lo in cands:
                claim = lo
            if claim is not None and self._confirm(probe, claim, lo, hi, step):
                result = claim
                break
            lo, hi = max(wins), min(loses)
            if hi - lo <= step:
                result = lo
                break
            probe((lo + hi) / 2)
        if ck is not None:
            self._cache[ck] = result
        return result

    @staticmethod
    def _confirm(probe, t: Fraction, lo: Fraction, hi: Fraction, step: Fraction) -> bool:
        """Wins just below ``t`` and loses just above it."""
        below = t - step
        if below > lo and not probe(below):
            return False
        return not probe(t + step)

    def payments(self, rule: Rule, inst: Instance, key: Hashable = None,
                 first: Allocation | None = None) -> dict[int, Fraction]:
        if first is None:
            first = rule(inst)
        return {i: self.threshold(rule, inst, i, key, first) for i in sorted(first.winners)}


def myerson_payments(rule: Rule, inst: Instance, bids=None, bits: int = DEFAULT_BITS,
                     engine: PaymentEngine | None = None) -> dict[int, Fraction]:
    """Threshold payment for every agent: winners get their critical bid, losers 0."""
    if bids is not None:
        inst = inst.with_costs(bids)
    engine = engine or PaymentEngine(bits)
    first = rule(inst)
    pay = {i: Fraction(0) for i in inst.agents}
    pay.update(engine.payments(rule, inst, None, first))
    return pay
