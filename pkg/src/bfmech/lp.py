"""LP relaxation of budgeted max weighted cut, exact solvers and pipage rounding.

Two exact solvers are provided. ``simplex`` is a dense rational simplex with
Bland's rule on the explicit model. ``hull`` uses the fact that the vertices
of the box-and-edge polytope are half-integral in ``x``: the relaxation value
at budget ``B`` is the upper concave envelope of ``(cost, L)`` over the
points ``x in {0, 1/2, 1}^X``, read off at ``B``. Both return exact rationals
and the test suite cross-checks them.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exhaustive import brute_opt
from .valuations import CutValuation, Instance, SizeCapExceeded, as_fraction

PIVOT_CAP = 100_000
HULL_CAP = 14


class PivotCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CutLpModel:
    n: int
    weights: dict                   # (i, j) with i < j -> Fraction
    costs: tuple[Fraction, ...]
    budget: Fraction
    fixed_zero: frozenset[int] = frozenset()

    @classmethod
    def from_instance(cls, inst: Instance, X: Iterable[int] | None = None, budget=None) -> "CutLpModel":
        val = inst.valuation
        if not isinstance(val, CutValuation):
            raise TypeError("the cut LP needs a cut valuation")
        X = inst.ground if X is None else frozenset(X)
        B = inst.budget if budget is None else as_fraction(budget)
        return cls(inst.n, dict(val.weights), inst.costs, B,
                   frozenset(range(1, inst.n + 1)) - frozenset(X))

    @property
    def free(self) -> list[int]:
        return [i for i in range(1, self.n + 1) if i not in self.fixed_zero]

    def dump(self) -> str:
        """Plain-text listing of objective and constraints."""
        lines = ["maximize"]
        lines.append("  " + " + ".join(f"{w} z{i}_{j}" for (i, j), w in self.weights.items()) or "  0")
        lines.append("subject to")
        for (i, j) in self.weights:
            lines.append(f"  z{i}_{j} - x{i} - x{j} <= 0")
            lines.append(f"  z{i}_{j} + x{i} + x{j} <= 2")
        lines.append("  " + " + ".join(f"{c} x{i}" for i, c in enumerate(self.costs, 1)) + f" <= {self.budget}")
        for i in sorted(self.fixed_zero):
            lines.append(f"  x{i} = 0")
        lines.append("bounds")
        lines.append("  0 <= x_i <= 1, 0 <= z_ij <= 1")
        return "\n".join(lines) + "\n"

    def residuals(self, x: Sequence[Fraction], z: dict) -> dict[str, Fraction]:
        """Slack of every constraint; all must be non-negative for feasibility."""
        out = {}
        for (i, j) in self.weights:
            zz = z.get((i, j), Fraction(0))
            out[f"z{i}_{j}<=x{i}+x{j}"] = x[i - 1] + x[j - 1] - zz
            out[f"z{i}_{j}<=2-x{i}-x{j}"] = 2 - x[i - 1] - x[j - 1] - zz
            out[f"0<=z{i}_{j}<=1"] = min(zz, 1 - zz)
        out["budget"] = self.budget - sum(c * xi for c, xi in zip(self.costs, x))
        for i in range(1, self.n + 1):
            out[f"0<=x{i}<=1"] = min(x[i - 1], 1 - x[i - 1])
            if i in self.fixed_zero:
                out[f"x{i}=0"] = -abs(x[i - 1])
        return out

    def feasible(self, x, z) -> bool:
        return all(r >= 0 for r in self.residuals(x, z).values())


@dataclass(frozen=True)
class LpSolution:
    x: tuple[Fraction, ...]
    z: dict
    objective: Fraction
    certificate: dict = field(default_factory=dict)
    method: str = "hull"


def L_value(model: CutLpModel, x: Sequence[Fraction]) -> Fraction:
    return sum((w * min(x[i - 1] + x[j - 1], 2 - x[i - 1] - x[j - 1])
                for (i, j), w in model.weights.items()), Fraction(0))


def F_value(model: CutLpModel, x: Sequence[Fraction]) -> Fraction:
    return sum((w * (x[i - 1] + x[j - 1] - 2 * x[i - 1] * x[j - 1])
                for (i, j), w in model.weights.items()), Fraction(0))


def _best_z(model: CutLpModel, x) -> dict:
    return {(i, j): min(Fraction(1), x[i - 1] + x[j - 1], 2 - x[i - 1] - x[j - 1])
            for (i, j) in model.weights}


# ---------------------------------------------------------------- simplex

def simplex_max(c: Sequence[Fraction], A: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                pivot_cap: int = PIVOT_CAP) -> tuple[Fraction, list[Fraction], list[int]]:
    """Maximise ``c.y`` subject to ``A y <= b``, ``y >= 0`` with ``b >= 0``.

    Dense rational tableau, slack starting basis, Bland's rule. Returns the
    objective, the primal vector and the final basis (column indices).
    """
    m, k = len(A), len(c)
    if any(bi < 0 for bi in b):
        raise ValueError("right-hand sides must be non-negative")
    width = k + m
    T = []
    for r in range(m):
        row = [as_fraction(a) for a in A[r]] + [Fraction(0)] * m + [as_fraction(b[r])]
        row[k + r] = Fraction(1)
        T.append(row)
    obj = [-as_fraction(cj) for cj in c] + [Fraction(0)] * (m + 1)
    basis = list(range(k, k + m))
    pivots = 0
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for r in range(m):
            a = T[r][enter]
            if a > 0:
                ratio = T[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave is None:
            raise ValueError("unbounded LP")
        pivots += 1
        if pivots > pivot_cap:
            raise PivotCapExceeded(f"more than {pivot_cap} pivots")
        prow = T[leave]
        piv = prow[enter]
        if piv != 1:
            prow = [a / piv for a in prow]
            T[leave] = prow
        nz = [j for j, a in enumerate(prow) if a]
        for r in range(m):
            if r == leave:
                continue
            f = T[r][enter]
            if f:
                row = T[r]
                for j in nz:
                    row[j] -= f * prow[j]
        f = obj[enter]
        for j in nz:
            obj[j] -= f * prow[j]
        basis[leave] = enter
    y = [Fraction(0)] * width
    for r, j in enumerate(basis):
        y[j] = T[r][-1]
    return obj[-1], y[:k], basis


def _solve_simplex(model: CutLpModel, pivot_cap: int) -> LpSolution:
    free = model.free
    pos = {i: p for p, i in enumerate(free)}
    edges = list(model.weights)
    nx = len(free)
    k = nx + len(edges)
    c = [Fraction(0)] * nx + [model.weights[e] for e in edges]
    A, b = [], []
    for e_idx, (i, j) in enumerate(edges):
        for sign, rhs in ((-1, 0), (1, 2)):
            row = [Fraction(0)] * k
            row[nx + e_idx] = Fraction(1)
            for v in (i, j):
                if v in pos:
                    row[pos[v]] += sign
            A.append(row)
            b.append(Fraction(rhs))
    for p in range(nx):
        row = [Fraction(0)] * k
        row[p] = Fraction(1)
        A.append(row)
        b.append(Fraction(1))
    row = [Fraction(0)] * k
    for i in free:
        row[pos[i]] = model.costs[i - 1]
    A.append(row)
    b.append(model.budget)
    objective, y, basis = simplex_max(c, A, b, pivot_cap)
    x = [Fraction(0)] * model.n
    for i in free:
        x[i - 1] = y[pos[i]]
    z = {e: y[nx + t] for t, e in enumerate(edges)}
    return LpSolution(tuple(x), z, objective, {"basis": basis}, "simplex")


# ---------------------------------------------------------------- hull

_point_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for d in values:
        out = out * d // math.gcd(out, d)
    return out


def _half_points(model: CutLpModel, key) -> tuple[np.ndarray, np.ndarray, int]:
    """All ``h in {0,1,2}^free`` with ``2 * wscale * L(h/2)`` as integers."""
    free = model.free
    cache = None
    if key is not None:
        cache = _point_cache.setdefault(key, {})
        hit = cache.get(tuple(free))
        if hit is not None:
            return hit
    wscale = _lcm(w.denominator for w in model.weights.values())
    k = len(free)
    if k:
        H = np.indices((3,) * k, dtype=np.int64).reshape(k, -1).T.copy()
    else:
        H = np.zeros((1, 0), dtype=np.int64)
    pos = {i: p for p, i in enumerate(free)}
    big = sum(int(w * wscale) for w in model.weights.values()) * 2
    dt = np.int64 if big < (1 << 62) else object
    Lv = np.zeros(len(H), dtype=dt)
    for (i, j), w in model.weights.items():
        W = int(w * wscale)
        a, b = pos.get(i), pos.get(j)
        if a is None and b is None:
            continue
        if a is None or b is None:
            # the other end sits at x = 0, so min(h, 4 - h) = h
            Lv = Lv + W * H[:, a if b is None else b].astype(dt)
        else:
            s = H[:, a] + H[:, b]
            Lv = Lv + W * np.minimum(s, 4 - s).astype(dt)
    out = (H, Lv, wscale)
    if cache is not None:
        if len(cache) > 256:
            cache.clear()
        cache[tuple(free)] = out
    return out


def _upper_hull(pts: list[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
    hull: list[tuple[int, int, int]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1, _), (x2, y2, _) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _solve_hull(model: CutLpModel, cache_key=None) -> LpSolution:
    free = model.free
    if len(free) > HULL_CAP:
        raise SizeCapExceeded(f"hull solver needs at most {HULL_CAP} free vertices")
    H, Lv, wscale = _half_points(model, cache_key)
    cden = _lcm([model.costs[i - 1].denominator for i in free] + [model.budget.denominator])
    cint = [int(model.costs[i - 1] * cden) for i in free]
    Bint = int(model.budget * cden) * 2
    big = sum(cint) * 2
    dt = np.int64 if big < (1 << 62) else object
    C = H.astype(dt) @ np.array(cint, dtype=dt) if free else np.zeros(1, dtype=dt)
    order = np.lexsort((-Lv, C)) if dt is np.int64 else sorted(range(len(C)), key=lambda t: (C[t], -Lv[t]))
    Cs, Ls = C[order], Lv[order]
    prev = np.concatenate([[-1], np.maximum.accumulate(Ls)[:-1]]) if len(Ls) > 1 else np.array([-1])
    keep = np.nonzero(Ls > prev)[0]
    pts = [(int(Cs[t]), int(Ls[t]), int(order[t])) for t in keep]
    hull = _upper_hull(pts)
    denom = 2 * wscale
    a = None
    for t, p in enumerate(hull):
        if p[0] <= Bint:
            a = t
    pa = hull[a]
    if a == len(hull) - 1:
        objective = Fraction(pa[1], denom)
        h = H[pa[2]]
        x_half = [Fraction(int(v), 2) for v in h]
        lam = Fraction(0)
    else:
        pb = hull[a + 1]
        theta = Fraction(Bint - pa[0], pb[0] - pa[0])  # weight on pb
        objective = Fraction(pa[1], denom) + theta * Fraction(pb[1] - pa[1], denom)
        ha, hb = H[pa[2]], H[pb[2]]
        x_half = [(1 - theta) * Fraction(int(u), 2) + theta * Fraction(int(v), 2) for u, v in zip(ha, hb)]
        # budget multiplier in original units
        lam = Fraction(pb[1] - pa[1], denom) / Fraction(pb[0] - pa[0], 2 * cden)
    x = [Fraction(0)] * model.n
    for p, i in enumerate(free):
        x[i - 1] = x_half[p]
    return LpSolution(tuple(x), _best_z(model, x), objective, {"budget_dual": lam}, "hull")


def solve_lp(model: CutLpModel, method: str = "hull", pivot_cap: int = PIVOT_CAP, cache_key=None) -> LpSolution:
    """Exact optimum of the cut relaxation."""
    if method == "simplex":
        return _solve_simplex(model, pivot_cap)
    if method == "hull":
        if len(model.free) > HULL_CAP:
            return _solve_simplex(model, pivot_cap)
        return _solve_hull(model, cache_key)
    raise ValueError(f"unknown method {method!r}")


def dual_bound(model: CutLpModel, lam: Fraction) -> Fraction:
    """``lam * B + max over half-integral x of (L(x) - lam * c.x)``; an upper bound on the LP value."""
    H, Lv, wscale = _half_points(model, None)
    free = model.free
    best = None
    for h, lv in zip(H, Lv):
        val = Fraction(int(lv), 2 * wscale) - lam * sum(
            (model.costs[i - 1] * int(hh) for i, hh in zip(free, h)), Fraction(0)) / 2
        if best is None or val > best:
            best = val
    return lam * model.budget + best


def opt_f(inst: Instance, X: Iterable[int], B=None, method: str = "hull") -> Fraction:
    """Relaxation value on the sub-instance ``X``."""
    model = CutLpModel.from_instance(inst, X, B)
    if not model.free:
        return Fraction(0)
    return solve_lp(model, method, cache_key=inst.valuation).objective


# ---------------------------------------------------------------- pipage

@dataclass(frozen=True)
class PipageStep:
    i: int
    j: int | None
    eps: Fraction | None
    F_before: Fraction
    F_after: Fraction
    fractional: int


@dataclass(frozen=True)
class PipageState:
    x: tuple[Fraction, ...]
    F_value: Fraction
    fractional_coords: frozenset[int]


def _fractional(x) -> list[int]:
    return [i + 1 for i, v in enumerate(x) if 0 < v < 1]


def pipage_round(model: CutLpModel, x_star) -> tuple[PipageState, list[PipageStep]]:
    """Budget-preserving pipage rounding down to at most one fractional coordinate."""
    x = list(x_star.x if isinstance(x_star, LpSolution) else x_star)
    x = [as_fraction(v) for v in x]
    F = F_value(model, x)
    trace: list[PipageStep] = []
    while True:
        frac = _fractional(x)
        zero = [i for i in frac if model.costs[i - 1] == 0]
        if zero:
            i = zero[0]
            before = F
            x[i - 1] = Fraction(1)
            up = F_value(model, x)
            x[i - 1] = Fraction(0)
            down = F_value(model, x)
            if up >= before:
                x[i - 1], F = Fraction(1), up
            else:
                F = down
            trace.append(PipageStep(i, None, None, before, F, len(_fractional(x))))
            continue
        if len(frac) < 2:
            break
        i, j = frac[0], frac[1]
        ci, cj = model.costs[i - 1], model.costs[j - 1]
        lo = max(-x[i - 1], (x[j - 1] - 1) * cj / ci)
        hi = min(1 - x[i - 1], x[j - 1] * cj / ci)
        best = None
        for eps in (lo, hi):
            y = list(x)
            y[i - 1] = x[i - 1] + eps
            y[j - 1] = x[j - 1] - eps * ci / cj
            # clean exact endpoints
            for t in (i - 1, j - 1):
                if y[t] < 0 or y[t] > 1:
                    raise AssertionError("pipage move left the box")
            Fy = F_value(model, y)
            if best is None or Fy > best[0]:
                best = (Fy, eps, y)
        before = F
        F, eps, x = best
        trace.append(PipageStep(i, j, eps, before, F, len(_fractional(x))))
    return PipageState(tuple(x), F, frozenset(_fractional(x))), trace


def last_coordinate_check(model: CutLpModel, state: PipageState) -> tuple[Fraction, Fraction, Fraction] | None:
    """For the single fractional coordinate ``r``: ``(F(x'), F(x0), v(r))``."""
    if not state.fractional_coords:
        return None
    (r,) = state.fractional_coords
    x0 = list(state.x)
    x0[r - 1] = Fraction(0)
    unit = [Fraction(0)] * model.n
    unit[r - 1] = Fraction(1)
    return state.F_value, F_value(model, x0), F_value(model, unit)


@dataclass(frozen=True)
class PipageReport:
    opt_f: Fraction
    opt: Fraction
    beta_I: Fraction
    ratio: Fraction
    beta_bound_holds: bool
    four_bound_holds: bool
    pipage_monotone: bool
    pipage_final_fractional: int
    last_coordinate_holds: bool


def verify_pipage_bound(inst: Instance, method: str = "hull") -> PipageReport:
    """Relaxation gap on the affordable agents, with a full pipage replay."""
    X = inst.affordable()
    model = CutLpModel.from_instance(inst, X)
    sol = solve_lp(model, method, cache_key=inst.valuation)
    opt, _ = brute_opt(inst, X)
    if opt > 0:
        beta = max(inst.v([i]) for i in X) / opt
        ratio = sol.objective / opt
    else:
        beta, ratio = Fraction(0), Fraction(1)
    state, trace = pipage_round(model, sol)
    mono = all(s.F_after >= s.F_before for s in trace) and state.F_value >= F_value(model, sol.x)
    counts = [len(_fractional(sol.x))] + [s.fractional for s in trace]
    mono = mono and all(b < a for a, b in zip(counts, counts[1:]))
    lc = last_coordinate_check(model, state)
    last_ok = lc is None or lc[0] <= lc[1] + lc[2]
    return PipageReport(sol.objective, opt, beta, ratio,
                        sol.objective <= (2 + 2 * beta) * opt,
                        sol.objective <= 4 * opt,
                        mono, len(state.fractional_coords), last_ok)


def random_feasible_point(model: CutLpModel, rng: np.random.Generator, grain: int = 1 << 16) -> list[Fraction]:
    """A random rational point of the box scaled into the budget."""
    x = [Fraction(0)] * model.n
    for i in model.free:
        x[i - 1] = Fraction(int(rng.integers(0, grain + 1)), grain)
    cost = sum(c * v for c, v in zip(model.costs, x))
    if cost > model.budget:
        s = model.budget / cost
        x = [v * s for v in x]
    return x
