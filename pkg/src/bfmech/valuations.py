"""Instances and value oracles.

Agents are labelled ``1..n``. Internally subsets are bitmasks with agent ``i``
on bit ``i - 1``; the public API accepts any iterable of agent ids.

All values are exact: every valuation keeps integer numerators over one
common denominator, so full value tables fit in numpy integer arrays.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

TABLE_CAP = 24
_EAGER_TABLE = 16


class DeskScaleOnly(UserWarning):
    """Exponential-time routine called on an instance near its size cap."""


class SizeCapExceeded(ValueError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError(f"float {x!r} is not exact; pass an int, Fraction or 'p/q' string")
    return Fraction(x)


def to_mask(S: Iterable[int], n: int | None = None) -> int:
    m = 0
    for i in S:
        if i < 1 or (n is not None and i > n):
            raise KeyError(f"unknown agent {i}")
        m |= 1 << (i - 1)
    return m


def from_mask(m: int) -> frozenset[int]:
    out = []
    i = 1
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return frozenset(out)


def _bits(m: int) -> list[int]:
    """Agent ids of a mask in increasing order."""
    out = []
    i = 1
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return out


def _common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = d * v.denominator // math.gcd(d, v.denominator)
    return d


def _bit_matrix(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)


def _int_dtype(bound: int):
    return np.int64 if bound < (1 << 62) else object


class Valuation:
    """Value oracle over agents ``1..n`` with a resettable query counter."""

    kind = "abstract"
    # cache all values as Fractions on first query (skip when _ival is cheap)
    _eager = True

    def __init__(self, n: int, scale: int = 1):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self._scale = scale
        self._queries = 0
        self._lock = threading.Lock()
        self._table: np.ndarray | None = None
        self._fast: list[Fraction] | None = None

    # subclasses provide scaled integer values
    def _ival(self, mask: int) -> int:
        raise NotImplementedError

    def _itable(self) -> np.ndarray:
        return np.array([self._ival(m) for m in range(1 << self.n)], dtype=object)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def queries(self) -> int:
        return self._queries

    def reset_queries(self) -> None:
        with self._lock:
            self._queries = 0

    def _count(self, k: int = 1) -> None:
        with self._lock:
            self._queries += k

    def value_mask(self, mask: int) -> Fraction:
        self._count()
        if self._fast is None and self._eager and self.n <= _EAGER_TABLE:
            self._fast = [Fraction(int(x), self._scale) for x in self.table_scaled()]
        if self._fast is not None:
            return self._fast[mask]
        return Fraction(self._ival(mask), self._scale)

    def value(self, S: Iterable[int]) -> Fraction:
        return self.value_mask(to_mask(S, self.n))

    __call__ = value

    def table_scaled(self) -> np.ndarray:
        """All ``2**n`` values times ``scale`` (exact integers), indexed by mask."""
        if self._table is None:
            if self.n > TABLE_CAP:
                raise SizeCapExceeded(f"value table needs n <= {TABLE_CAP}, got {self.n}")
            if self.n > _EAGER_TABLE:
                warnings.warn(f"building a 2^{self.n} value table", DeskScaleOnly, stacklevel=2)
            self._table = self._itable()
        return self._table

    @property
    def scale(self) -> int:
        return self._scale

    def table(self) -> list[Fraction]:
        return [Fraction(int(x), self._scale) for x in self.table_scaled()]

    def merged(self, keep: Sequence[int], group: Sequence[int]) -> "Valuation":
        """Valuation on ``keep`` (renumbered 1..k) plus one agent standing for ``group``."""
        keep = list(keep)
        group_mask = to_mask(group)
        k = len(keep)
        base = self.table_scaled()
        tab = []
        for m in range(1 << (k + 1)):
            orig = 0
            for pos, a in enumerate(keep):
                if m >> pos & 1:
                    orig |= 1 << (a - 1)
            if m >> k & 1:
                orig |= group_mask
            tab.append(Fraction(int(base[orig]), self._scale))
        return TabularValuation(tab)


class CutValuation(Valuation):
    """Weighted cut function of an undirected graph on agents ``1..n``."""

    kind = "cut"

    def __init__(self, n: int, edges: Iterable[tuple[int, int, object]] = ()):
        weights: dict[tuple[int, int], Fraction] = {}
        for i, j, w in edges:
            w = as_fraction(w)
            if i == j:
                if w != 0:
                    raise ValueError(f"self-loop on agent {i}")
                continue
            if not (1 <= i <= n and 1 <= j <= n):
                raise KeyError(f"edge ({i}, {j}) outside 1..{n}")
            if w < 0:
                raise ValueError(f"negative weight on edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in weights and weights[key] != w:
                raise ValueError(f"asymmetric weight for edge {key}")
            weights[key] = w
        self.weights = {k: w for k, w in sorted(weights.items()) if w != 0}
        scale = _common_denominator(self.weights.values())
        super().__init__(n, scale)
        W = [[0] * n for _ in range(n)]
        for (i, j), w in self.weights.items():
            iw = int(w * scale)
            W[i - 1][j - 1] = iw
            W[j - 1][i - 1] = iw
        self._W = W
        self._deg = [sum(row) for row in W]

    @classmethod
    def from_matrix(cls, w: Sequence[Sequence[object]]) -> "CutValuation":
        n = len(w)
        edges = []
        for i in range(n):
            if len(w[i]) != n:
                raise ValueError("weight matrix must be square")
            if as_fraction(w[i][i]) != 0:
                raise ValueError("weight matrix must have a zero diagonal")
            for j in range(i + 1, n):
                if as_fraction(w[i][j]) != as_fraction(w[j][i]):
                    raise ValueError(f"asymmetric weight for edge ({i + 1}, {j + 1})")
                edges.append((i + 1, j + 1, w[i][j]))
        return cls(n, edges)

    def weight(self, i: int, j: int) -> Fraction:
        return self.weights.get((min(i, j), max(i, j)), Fraction(0))

    def _ival(self, mask: int) -> int:
        W = self._W
        inside = [i for i in range(self.n) if mask >> i & 1]
        total = 0
        for i in inside:
            row = W[i]
            total += self._deg[i]
            for j in inside:
                total -= row[j]
        return total

    def _itable(self) -> np.ndarray:
        n = self.n
        bound = sum(self._deg) + 1
        if n == 0:
            return np.zeros(1, dtype=np.int64)
        dt = _int_dtype(bound)
        bits = _bit_matrix(n).astype(dt)
        W = np.array(self._W, dtype=dt)
        deg = np.array(self._deg, dtype=dt)
        return bits @ deg - ((bits @ W) * bits).sum(axis=1)

    def merged(self, keep, group):
        keep = list(keep)
        pos = {a: p + 1 for p, a in enumerate(keep)}
        hub = len(keep) + 1
        gset = set(group)
        acc: dict[tuple[int, int], Fraction] = {}
        for (i, j), w in self.weights.items():
            a = hub if i in gset else pos[i]
            b = hub if j in gset else pos[j]
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            acc[key] = acc.get(key, Fraction(0)) + w
        return CutValuation(hub, [(i, j, w) for (i, j), w in acc.items()])


class AdditiveValuation(Valuation):
    kind = "additive"
    _eager = False

    def __init__(self, values: Sequence[object]):
        self.values = tuple(as_fraction(v) for v in values)
        if any(v < 0 for v in self.values):
            raise ValueError("additive values must be non-negative")
        scale = _common_denominator(self.values)
        super().__init__(len(self.values), scale)
        self._iv = [int(v * scale) for v in self.values]

    def _ival(self, mask: int) -> int:
        return sum(self._iv[i] for i in range(self.n) if mask >> i & 1)

    def _itable(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(1, dtype=np.int64)
        dt = _int_dtype(sum(self._iv) + 1)
        return _bit_matrix(self.n).astype(dt) @ np.array(self._iv, dtype=dt)

    def merged(self, keep, group):
        vals = [self.values[a - 1] for a in keep]
        vals.append(sum((self.values[a - 1] for a in group), Fraction(0)))
        return AdditiveValuation(vals)


class XosValuation(Valuation):
    """Pointwise maximum of non-negative additive clauses."""

    kind = "xos"

    def __init__(self, clauses: Sequence[Sequence[object]]):
        if not clauses:
            raise ValueError("an XOS valuation needs at least one clause")
        n = len(clauses[0])
        cl = []
        for c in clauses:
            if len(c) != n:
                raise ValueError("all clauses must have one weight per agent")
            row = tuple(as_fraction(x) for x in c)
            if any(x < 0 for x in row):
                raise ValueError("clause weights must be non-negative")
            cl.append(row)
        self.clauses = tuple(cl)
        scale = _common_denominator(x for row in cl for x in row)
        super().__init__(n, scale)
        self._ic = [[int(x * scale) for x in row] for row in cl]

    def _ival(self, mask: int) -> int:
        idx = [i for i in range(self.n) if mask >> i & 1]
        return max(sum(row[i] for i in idx) for row in self._ic)

    def _itable(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(1, dtype=np.int64)
        dt = _int_dtype(max(sum(r) for r in self._ic) + 1)
        C = np.array(self._ic, dtype=dt).T
        return (_bit_matrix(self.n).astype(dt) @ C).max(axis=1)

    def clause_value(self, k: int, S: Iterable[int]) -> Fraction:
        return sum((self.clauses[k][i - 1] for i in S), Fraction(0))

    def best_clause(self, S: Iterable[int]) -> int:
        """Lowest-index clause attaining ``v(S)``."""
        S = list(S)
        vals = [self.clause_value(k, S) for k in range(len(self.clauses))]
        return vals.index(max(vals))

    def merged(self, keep, group):
        rows = []
        for row in self.clauses:
            r = [row[a - 1] for a in keep]
            r.append(sum((row[a - 1] for a in group), Fraction(0)))
            rows.append(r)
        return XosValuation(rows)


class TabularValuation(Valuation):
    """Explicit value for every subset, indexed by bitmask."""

    kind = "tabular"

    def __init__(self, table: Sequence[object]):
        size = len(table)
        n = size.bit_length() - 1
        if size != 1 << n:
            raise ValueError("table length must be a power of two")
        if n > TABLE_CAP:
            raise SizeCapExceeded(f"tabular valuations need n <= {TABLE_CAP}")
        vals = [as_fraction(x) for x in table]
        if vals[0] != 0:
            raise ValueError("v(empty set) must be 0")
        scale = _common_denominator(vals)
        super().__init__(n, scale)
        self._tab = [int(v * scale) for v in vals]

    @classmethod
    def from_function(cls, n: int, f) -> "TabularValuation":
        return cls([f(from_mask(m)) for m in range(1 << n)])

    def _ival(self, mask: int) -> int:
        return self._tab[mask]

    def _itable(self) -> np.ndarray:
        bound = max(abs(x) for x in self._tab) + 1
        return np.array(self._tab, dtype=_int_dtype(bound))


@dataclass(frozen=True)
class Instance:
    """Agents ``1..n`` with costs (or bids), a budget and a value oracle.

    ``ground`` restricts every query and optimisation to a subset of agents
    (a sub-instance view); costs and budget are shared with the parent.
    ``origin`` maps each agent back to the original agents it stands for
    after cost normalisation.
    """

    valuation: Valuation
    costs: tuple[Fraction, ...]
    budget: Fraction
    ground: frozenset[int] = field(default=None)  # type: ignore[assignment]
    origin: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        costs = tuple(as_fraction(c) for c in self.costs)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "budget", as_fraction(self.budget))
        if len(costs) != self.valuation.n:
            raise ValueError(f"{len(costs)} costs for {self.valuation.n} agents")
        if any(c < 0 for c in costs):
            raise ValueError("costs must be non-negative")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.ground is None:
            object.__setattr__(self, "ground", frozenset(range(1, len(costs) + 1)))
        else:
            g = frozenset(self.ground)
            if any(not 1 <= i <= len(costs) for i in g):
                raise KeyError("ground set contains unknown agents")
            object.__setattr__(self, "ground", g)

    @property
    def n(self) -> int:
        return self.valuation.n

    @property
    def agents(self) -> list[int]:
        return sorted(self.ground)

    @property
    def ground_mask(self) -> int:
        return to_mask(self.ground)

    def cost(self, i: int) -> Fraction:
        return self.costs[i - 1]

    def total_cost(self, S: Iterable[int]) -> Fraction:
        return sum((self.costs[i - 1] for i in S), Fraction(0))

    def v(self, S: Iterable[int]) -> Fraction:
        return self.valuation.value(S)

    def v_mask(self, mask: int) -> Fraction:
        return self.valuation.value_mask(mask)

    def affordable(self) -> list[int]:
        """``A' = {i : c_i <= B}`` within the ground set."""
        return [i for i in self.agents if self.costs[i - 1] <= self.budget]

    def with_cost(self, i: int, b) -> "Instance":
        costs = list(self.costs)
        costs[i - 1] = as_fraction(b)
        return replace(self, costs=tuple(costs))

    def with_costs(self, costs: Sequence[object]) -> "Instance":
        return replace(self, costs=tuple(costs))

    def restrict(self, X: Iterable[int]) -> "Instance":
        return replace(self, ground=frozenset(X) & self.ground)

    def to_original(self, S: Iterable[int]) -> frozenset[int]:
        if self.origin is None:
            return frozenset(S)
        return frozenset(a for i in S for a in self.origin[i - 1])


SubInstanceView = Instance.restrict


def value(inst: Instance, S: Iterable[int]) -> Fraction:
    S = frozenset(S)
    if not S <= frozenset(range(1, inst.n + 1)):
        raise KeyError(f"unknown agents {sorted(S - set(range(1, inst.n + 1)))}")
    return inst.v(S)


def marginal(inst: Instance, S: Iterable[int], i: int) -> Fraction:
    S = frozenset(S)
    if i in S:
        raise ValueError(f"agent {i} is already in S")
    return value(inst, S | {i}) - value(inst, S)
