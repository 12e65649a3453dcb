"""Instance files: JSON documents with rationals written as ``"p/q"`` strings."""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from .valuations import (
    AdditiveValuation,
    CutValuation,
    Instance,
    TabularValuation,
    XosValuation,
)


class InstanceFormatError(ValueError):
    pass


def fmt(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise InstanceFormatError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise InstanceFormatError(f"rationals must be strings or integers, got {s!r}")
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"bad rational {s!r}") from exc


def instance_to_dict(inst: Instance) -> dict:
    val = inst.valuation
    doc = {"kind": val.kind, "n": val.n, "budget": fmt(inst.budget),
           "costs": [fmt(c) for c in inst.costs]}
    if val.kind == "cut":
        doc["weights"] = [[i, j, fmt(w)] for (i, j), w in sorted(val.weights.items())]
    elif val.kind == "additive":
        doc["values"] = [fmt(x) for x in val.values]
    elif val.kind == "xos":
        doc["clauses"] = [[fmt(x) for x in row] for row in val.clauses]
    elif val.kind == "tabular":
        doc["table"] = [fmt(x) for x in val.table()]
    else:
        raise InstanceFormatError(f"cannot serialise valuation kind {val.kind!r}")
    return doc


def _rationals(seq, what: str) -> list[Fraction]:
    if not isinstance(seq, list):
        raise InstanceFormatError(f"{what} must be a list")
    out = [parse_rational(x) for x in seq]
    if any(x < 0 for x in out):
        raise InstanceFormatError(f"{what} must be non-negative")
    return out


def instance_from_dict(doc: dict) -> Instance:
    try:
        kind, n = doc["kind"], int(doc["n"])
        budget = parse_rational(doc["budget"])
        costs = _rationals(doc["costs"], "costs")
    except KeyError as exc:
        raise InstanceFormatError(f"missing key {exc.args[0]!r}") from None
    if n < 1:
        raise InstanceFormatError("n must be positive")
    if len(costs) != n:
        raise InstanceFormatError(f"{len(costs)} costs for n = {n}")
    if kind == "cut":
        seen: dict[tuple[int, int], Fraction] = {}
        for entry in doc.get("weights", []):
            if len(entry) != 3:
                raise InstanceFormatError(f"weight entry {entry!r} is not a triple")
            i, j, w = int(entry[0]), int(entry[1]), parse_rational(entry[2])
            if w < 0:
                raise InstanceFormatError(f"negative weight on ({i}, {j})")
            if i == j or not (1 <= i <= n and 1 <= j <= n):
                raise InstanceFormatError(f"bad edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen and seen[key] != w:
                raise InstanceFormatError(f"asymmetric weights on {key}")
            seen[key] = w
        val = CutValuation(n, [(i, j, w) for (i, j), w in seen.items()])
    elif kind == "additive":
        vals = _rationals(doc["values"], "values")
        if len(vals) != n:
            raise InstanceFormatError("values length differs from n")
        val = AdditiveValuation(vals)
    elif kind == "xos":
        rows = [_rationals(r, "clause weights") for r in doc["clauses"]]
        if not rows or any(len(r) != n for r in rows):
            raise InstanceFormatError("every clause needs n weights")
        val = XosValuation(rows)
    elif kind == "tabular":
        table = [parse_rational(x) for x in doc["table"]]
        if len(table) != 1 << n:
            raise InstanceFormatError("table needs 2^n entries")
        if table[0] != 0:
            raise InstanceFormatError("v(empty set) must be 0")
        val = TabularValuation(table)
    else:
        raise InstanceFormatError(f"unknown kind {kind!r}")
    try:
        return Instance(val, tuple(costs), budget)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc


def dumps(inst: Instance) -> str:
    """Canonical text: sorted keys, no whitespace, trailing newline."""
    return json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not a JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be an object")
    return instance_from_dict(doc)


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst), encoding="utf-8")


def load(path) -> Instance:
    return loads(Path(path).read_text(encoding="utf-8"))


def digest(inst: Instance) -> str:
    return hashlib.sha256(dumps(inst).encode()).hexdigest()[:16]
