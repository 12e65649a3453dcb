"""Brute-force ground truth: exact expectations, audits and ratio sweeps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable

from .exhaustive import brute_opt
from .fileio import digest, fmt
from .generators import GeneratorParams, family_stream
from .mechanisms import (
    MechanismSpec,
    RandomizedOutcome,
    _greedy_alloc,
    _run_leaf,
    registry,
)
from .payments import PaymentEngine
from .surd import SQRT6
from .valuations import Instance

__all__ = [
    "brute_opt", "exact_expectation", "ratio_of", "AuditCheck", "AuditReport", "audit_mechanism",
    "deviation_grid", "measure_ratio", "CANARY", "GREEDY_SM", "RATIO_BOUNDS", "CSV_FIELDS",
]

GRID_POINTS = 12
NEAR = Fraction(1, 1 << 20)

CANARY = MechanismSpec(
    "canary-pay-bid",
    lambda inst: [(Fraction(1), "det")],
    lambda inst, leaf: _greedy_alloc(inst, inst.budget / 2, "greedy"),
    payment_rule=lambda inst, alloc: {i: inst.costs[i - 1] for i in alloc.winners},
)

GREEDY_SM = MechanismSpec(
    "greedy-sm",
    lambda inst: [(Fraction(1), "det")],
    lambda inst, leaf: _greedy_alloc(inst, inst.budget / 2, "greedy"),
)

# rational upper approximations of the proven ratios
RATIO_BOUNDS: dict[str, Fraction] = {
    "rand-mech-sm": Fraction(5),
    "mech-sm": (3 + SQRT6).upper(),
    "rand-mech-symsm": Fraction(10),
    "det-mech-symsm": (6 + 2 * SQRT6).upper(),
    "rand-mech-ucut": Fraction(10),
    "det-mech-ucut": Fraction(109, 4),
    "det-mech-symsm-frac": Fraction(5872, 100),
    "det-mech-wcut-tuned": Fraction(109, 4),
    "additive-mechanism": Fraction(3),
    "main-xos": Fraction(244),
}

CSV_FIELDS = ["instance_digest", "mechanism", "n", "B", "opt", "value_or_expectation", "ratio",
              "all_checks_passed"]


def exact_expectation(outcome: RandomizedOutcome) -> Fraction:
    total = sum((p for p, _ in outcome.branches), Fraction(0))
    if outcome.mode == "exact" and total != 1:
        raise ValueError(f"branch probabilities sum to {total}")
    return sum((p * r.value for p, r in outcome.branches), Fraction(0))


def ratio_of(opt: Fraction, value: Fraction) -> Fraction | None:
    """``opt / value``; 1 when ``opt`` is 0 and ``None`` (unbounded) when only ``value`` is."""
    if opt == 0:
        return Fraction(1)
    if value == 0:
        return None
    return opt / value


@dataclass(frozen=True)
class AuditCheck:
    prop: str
    verdict: str               # "pass" or "fail"
    witness: dict | None = None


@dataclass
class AuditReport:
    instance_digest: str
    mechanism: str
    checks: list[AuditCheck] = field(default_factory=list)
    measured_ratio: Fraction | None = None
    opt: Fraction = Fraction(0)
    value: Fraction = Fraction(0)

    @property
    def passed(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks)

    def failures(self) -> list[AuditCheck]:
        return [c for c in self.checks if c.verdict == "fail"]


def deviation_grid(c: Fraction, B: Fraction, threshold: Fraction | None = None,
                   points: int = GRID_POINTS) -> list[Fraction]:
    """``points`` evenly spaced bids over ``[c/4, 4c]`` (``[0, 2B]`` for zero cost) plus threshold neighbours."""
    lo, hi = (c / 4, 4 * c) if c > 0 else (Fraction(0), 2 * B)
    step = (hi - lo) / (points - 1)
    grid = {lo + k * step for k in range(points)}
    if threshold is not None:
        grid |= {threshold - NEAR, threshold + NEAR}
    return sorted(b for b in grid if b >= 0)


def _utility_at(spec: MechanismSpec, inst: Instance, leaf: Hashable, i: int, bid: Fraction,
                true_cost: Fraction, engine: PaymentEngine) -> tuple[bool, Fraction]:
    J = inst.with_cost(i, bid)
    alloc = spec.allocate(J, leaf)
    if i not in alloc.winners:
        return False, Fraction(0)
    if spec.payment_rule is not None:
        pay = spec.payment_rule(J, alloc)[i]
    else:
        key = (spec.name, leaf, id(J.valuation), J.ground, J.budget)
        pay = engine.threshold(lambda K: spec.allocate(K, leaf), J, i, key, alloc)
    return True, pay - true_cost


def _spec(mech) -> MechanismSpec:
    if isinstance(mech, MechanismSpec):
        return mech
    extra = {"canary-pay-bid": CANARY, "greedy-sm": GREEDY_SM}
    table = {**registry(), **extra}
    if mech not in table:
        raise KeyError(f"unknown mechanism {mech!r}")
    return table[mech]


def audit_mechanism(mech, inst: Instance, points: int = GRID_POINTS, engine: PaymentEngine | None = None,
                    ratio_bound: Fraction | None = None, truthfulness: bool = True) -> AuditReport:
    """Budget, IR, monotonicity and grid truthfulness on every leaf, plus the measured ratio.

    A finite grid can only falsify truthfulness, never prove it.
    """
    spec = _spec(mech)
    engine = engine or PaymentEngine()
    report = AuditReport(digest(inst), spec.name)
    leaves = spec.leaves(inst)
    fails: dict[str, dict] = {}
    expectation = Fraction(0)
    for p, leaf in leaves:
        res = _run_leaf(spec, inst, leaf, True, engine)
        expectation += p * res.value
        paid = res.total_payment
        if paid > inst.budget and "budget" not in fails:
            fails["budget"] = {"leaf": leaf, "paid": paid, "budget": inst.budget}
        for i in inst.agents:
            c, pay = inst.cost(i), res.payments.get(i, Fraction(0))
            if i in res.winners and pay < c and "individual rationality" not in fails:
                fails["individual rationality"] = {"leaf": leaf, "agent": i, "bid": c, "payment": pay}
            if i not in res.winners and pay != 0 and "loser payments" not in fails:
                fails["loser payments"] = {"leaf": leaf, "agent": i, "payment": pay}
            if not truthfulness:
                continue
            u0 = pay - c if i in res.winners else Fraction(0)
            thr = pay if i in res.winners else None
            for b in deviation_grid(c, inst.budget, thr, points):
                if b == c:
                    continue
                won, u = _utility_at(spec, inst, leaf, i, b, c, engine)
                if i in res.winners and b < c and not won and "monotonicity" not in fails:
                    fails["monotonicity"] = {"leaf": leaf, "agent": i, "bid": b, "cost": c}
                if u > u0 and "truthfulness" not in fails:
                    fails["truthfulness"] = {"leaf": leaf, "agent": i, "bid": b, "cost": c,
                                             "utility": u, "truthful_utility": u0,
                                             "bids": tuple(inst.with_cost(i, b).costs)}
    props = ["budget", "individual rationality", "loser payments"]
    if truthfulness:
        props += ["monotonicity", "truthfulness"]
    for prop in props:
        report.checks.append(AuditCheck(prop, "fail" if prop in fails else "pass", fails.get(prop)))
    opt, best = brute_opt(inst)
    r = ratio_of(opt, expectation)
    report.opt, report.value, report.measured_ratio = opt, expectation, r
    if ratio_bound is not None:
        ok = r is not None and r <= ratio_bound
        report.checks.append(AuditCheck("ratio", "pass" if ok else "fail",
                                        None if ok else {"opt": opt, "opt_set": best, "value": expectation}))
    return report


def _row(inst: Instance, name: str, opt: Fraction, value: Fraction, r: Fraction | None, ok: bool,
         decimals: int | None) -> dict:
    row = {"instance_digest": digest(inst), "mechanism": name, "n": inst.n, "B": fmt(inst.budget),
           "opt": fmt(opt), "value_or_expectation": fmt(value), "ratio": "inf" if r is None else fmt(r),
           "all_checks_passed": "true" if ok else "false"}
    if decimals is not None:
        row["ratio_decimal"] = "inf" if r is None else f"{float(r):.{decimals}f}"
    return row


@dataclass
class SweepResult:
    rows: list[dict]
    worst_ratio: Fraction | None
    violations: int
    reports: list[AuditReport] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = list(CSV_FIELDS)
        if self.rows and "ratio_decimal" in self.rows[0]:
            fields.append("ratio_decimal")
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows)
        return buf.getvalue()


def _worse(a: Fraction | None, b: Fraction | None) -> Fraction | None:
    if a is None or b is None:
        return None
    return max(a, b)


def measure_instances(mech, instances: Iterable[Instance], ratio_bound: Fraction | None = None,
                      audit: bool = False, decimals: int | None = None) -> SweepResult:
    """Exact expectation against brute-force opt on each instance; optionally full audits."""
    spec = _spec(mech)
    bound = RATIO_BOUNDS.get(spec.name) if ratio_bound is None else ratio_bound
    rows, reports = [], []
    worst: Fraction | None = Fraction(1)
    bad = 0
    for inst in instances:
        if audit:
            rep = audit_mechanism(spec, inst, ratio_bound=bound)
            reports.append(rep)
            opt, val, r, ok = rep.opt, rep.value, rep.measured_ratio, rep.passed
        else:
            val = sum((p * _run_leaf(spec, inst, leaf, False, None).value for p, leaf in spec.leaves(inst)),
                      Fraction(0))
            opt = brute_opt(inst)[0]
            r = ratio_of(opt, val)
            ok = bound is None or (r is not None and r <= bound)
        worst = _worse(worst, r)
        bad += not ok
        rows.append(_row(inst, spec.name, opt, val, r, ok, decimals))
    return SweepResult(rows, worst, bad, reports)


def measure_ratio(mech, family: str, count: int, seed: int, n_range: tuple[int, int] = (1, 10),
                  params: GeneratorParams = GeneratorParams(), audit: bool = False,
                  ratio_bound: Fraction | None = None, decimals: int | None = None) -> SweepResult:
    """Seeded sweep over a generated family; one CSV row per instance."""
    return measure_instances(mech, family_stream(family, count, seed, n_range, params), ratio_bound,
                             audit, decimals)
