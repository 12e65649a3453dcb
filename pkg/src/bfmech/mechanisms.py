"""Truthful budget-feasible mechanisms.

Every mechanism is a probability distribution over deterministic allocation
rules ("leaves"). A leaf maps the bid vector to a winner set; payments are
the threshold bids of that leaf, computed by :mod:`bfmech.payments`.
"""
from __future__ import annotations

import contextvars
import math
import warnings
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

import numpy as np

from .exhaustive import _subset_arrays, brute_opt
from .greedy import greedy_sm
from .local_search import approx_local_search
from .lp import opt_f as cut_opt_f
from .payments import Allocation, PaymentEngine
from .surd import SQRT6, Surd, alpha as alpha_of, eta as eta_of
from .valuations import (
    AdditiveValuation,
    DeskScaleOnly,
    Instance,
    SizeCapExceeded,
    as_fraction,
    from_mask,
)

BRUTE_CAP = 20
WARN_ABOVE = 16
DET_UCUT_GUARD = Fraction(105, 4)
TUNED_ALPHA = Fraction(5249, 200)
GUARD_MECH_SM = 2 + SQRT6

# hints only matter to the payment engine; value-only runs skip them
_want_hints = contextvars.ContextVar("want_hints", default=True)

OptProvider = Callable[[Instance, frozenset], Fraction]


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class MechanismResult:
    winners: frozenset[int]
    payments: dict[int, Fraction]
    value: Fraction
    branch_tag: str

    @property
    def total_payment(self) -> Fraction:
        return sum(self.payments.values(), Fraction(0))


@dataclass(frozen=True)
class RandomizedOutcome:
    branches: list[tuple[Fraction, MechanismResult]]
    mode: str                      # "exact" or "sampled"
    seed: int | None = None
    leaves: list[Hashable] = field(default_factory=list)

    @property
    def expectation(self) -> Fraction:
        return sum((p * r.value for p, r in self.branches), Fraction(0))


# ---------------------------------------------------------------- parameters

def _frac_inequality_holds(rho, eps, eps_prime, alpha) -> bool:
    """``(1+d) eta / ((1-e') d eta - rho) <= eta + 1 + e''`` with ``d = gamma/2``."""
    rho, eps, eps_prime = as_fraction(rho), as_fraction(eps), as_fraction(eps_prime)
    eta = eta_of(rho)
    gamma = 1 - (alpha + 2) * eps_prime
    if gamma.sign() <= 0:
        return False
    delta = gamma / 2
    denom = (1 - eps_prime) * delta * eta - rho
    if denom.sign() <= 0:
        return False
    eps2 = eps / (rho + 1)
    return ((eta + 1 + eps2) * denom - (1 + delta) * eta).sign() >= 0


def solve_eps_prime(rho, eps, alpha=None) -> Fraction:
    """Largest ``2**-k`` (``k <= 64``) satisfying the local-search slack inequality."""
    rho, eps = as_fraction(rho), as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = alpha_of(rho) if alpha is None else (alpha if isinstance(alpha, Surd) else Surd(as_fraction(alpha)))
    for k in range(1, 65):
        e = Fraction(1, 1 << k)
        if _frac_inequality_holds(rho, eps, e, a):
            return e
    raise ValueError("no eps' >= 2**-64 satisfies the inequality")


@dataclass(frozen=True)
class FracMechanismParams:
    """Constants of the fractional mechanisms.

    ``alpha`` and ``eta`` are rational upper approximations for display;
    branch decisions use the exact ``alpha_exact`` and ``eta_exact``.
    ``inner_rho`` is the gap bound used inside the side mechanism.
    """

    rho: Fraction
    alpha: Fraction
    eta: Fraction
    eps: Fraction
    eps_prime: Fraction
    gamma: Fraction
    alpha_exact: Surd
    eta_exact: Surd
    inner_rho: Fraction

    @classmethod
    def generic(cls, rho, eps) -> "FracMechanismParams":
        rho, eps = as_fraction(rho), as_fraction(eps)
        a = alpha_of(rho)
        e = solve_eps_prime(rho, eps)
        gamma = 1 - (a + 2) * e
        return cls(rho, a.upper(), eta_of(rho).upper(), eps, e, _lower(gamma), a, eta_of(rho), rho)

    @classmethod
    def tuned_cut(cls, eps=Fraction(1, 200), alpha=TUNED_ALPHA) -> "FracMechanismParams":
        alpha = as_fraction(alpha)
        inner = 2 + 8 / alpha
        e = solve_eps_prime(inner, eps, alpha)
        return cls(Fraction(4), alpha, eta_of(inner).upper(), as_fraction(eps), e,
                   1 - (alpha + 2) * e, Surd(alpha), eta_of(inner), inner)

    def check(self) -> bool:
        return _frac_inequality_holds(self.inner_rho, self.eps, self.eps_prime, self.alpha_exact)

    def ratio_bound(self) -> Surd:
        """``max(alpha + 1, (r + 1)(r + 2 + eps/(r + 1) + sqrt(r^2 + 4r + 1)))`` with ``r = inner_rho``."""
        r = self.inner_rho
        side = (r + 1) * (r + 2 + self.eps / (r + 1) + Surd.sqrt(r * r + 4 * r + 1))
        top = self.alpha_exact + 1
        return top if top >= side else side


def _lower(s: Surd) -> Fraction:
    return s.p if s.q == 0 else -((-s).upper())


# ---------------------------------------------------------------- helpers

def _check_size(inst: Instance, what: str) -> None:
    k = len(inst.ground)
    if k > BRUTE_CAP:
        raise SizeCapExceeded(f"{what} needs at most {BRUTE_CAP} agents, got {k}")
    if k > WARN_ABOVE:
        warnings.warn(f"{what}: exhaustive search over 2^{k} sets", DeskScaleOnly, stacklevel=3)


def best_singleton(inst: Instance) -> int | None:
    """Most valuable affordable agent, lowest index on ties."""
    best = None
    for i in inst.affordable():
        val = inst.v([i])
        if best is None or val > best[0]:
            best = (val, i)
    return None if best is None else best[1]


_ls_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def local_optimum(inst: Instance, eps=0) -> frozenset[int]:
    """Local search result; cached per valuation since it ignores costs."""
    eps = as_fraction(eps)
    per = _ls_cache.setdefault(inst.valuation, {})
    key = (inst.ground, eps)
    if key not in per:
        per[key] = approx_local_search(inst, eps).S
    return per[key]


def _scaled(inst: Instance, X: Sequence[int]):
    gm, cm, den = _subset_arrays(inst, list(X), inst.costs)
    vals = np.asarray(inst.valuation.table_scaled())[gm]
    return gm, cm.astype(object), den, vals.astype(object)


def _exceeds(vals: np.ndarray, g, ref: Fraction, scale: int, strict: bool) -> np.ndarray:
    """Elementwise ``vals/scale > g * ref`` (or ``>=``) with ``g`` rational or a surd."""
    g = g if isinstance(g, Surd) else Surd(as_fraction(g))
    # vals > p*ref*scale + q*ref*scale*sqrt(d)
    P = g.p * ref * scale
    Q = g.q * ref * scale
    m = P.denominator * Q.denominator
    D = vals * m - int(P * m)
    R = int(Q * m)
    if R == 0 or g.d == 0:
        return np.asarray(D > 0 if strict else D >= 0, dtype=bool)
    if R > 0:
        sq = np.asarray([int(x) * int(x) for x in D], dtype=object)
        ok = (D > 0) & (sq > R * R * g.d) if strict else (D >= 0) & (sq >= R * R * g.d)
        return np.asarray(ok, dtype=bool)
    raise ValueError("negative surd coefficient")


def _drop_hints(inst: Instance, X: Sequence[int], good: np.ndarray, gm, cm, den, alloc: Allocation,
                agents: Sequence[int]) -> None:
    """Record for each agent ``j`` the largest bid keeping some good set containing ``j`` feasible."""
    B = inst.budget
    for j in agents:
        bit = 1 << (j - 1)
        has = (gm & bit) != 0
        sel = good & has
        if not sel.any():
            continue
        cj = int(inst.costs[j - 1] * den)
        rest = cm[sel] - cj
        alloc.add_hint(j, B - Fraction(int(rest.min()), den))


def opt_brute(inst: Instance, X) -> Fraction:
    return brute_opt(inst, X)[0]


# ---------------------------------------------------------------- leaves

def _greedy_alloc(inst: Instance, beta, tag: str) -> Allocation:
    S, tr = greedy_sm(inst, beta, record_hints=_want_hints.get())
    return Allocation(S, tag, tr.hints)


def _istar_alloc(inst: Instance) -> Allocation:
    i = best_singleton(inst)
    if i is None:
        return Allocation(frozenset(), "empty A'")
    return Allocation(frozenset([i]), "returned i*")


def _guarded_alloc(inst: Instance, guard, opt_other: Callable[[frozenset], Fraction], beta,
                   brute_hints: bool = False) -> Allocation:
    """``guard * v(i*) >= opt_other(A' - i*)`` returns ``i*``, else greedy with ``beta``."""
    i = best_singleton(inst)
    if i is None:
        return Allocation(frozenset(), "empty A'")
    vi = inst.v([i])
    others = frozenset(inst.affordable()) - {i}
    o = opt_other(others)
    g = guard if isinstance(guard, Surd) else Surd(as_fraction(guard))
    if (g * vi - o).sign() >= 0:
        return Allocation(frozenset([i]), "returned i*")
    alloc = _greedy_alloc(inst, beta, "greedy")
    if brute_hints and _want_hints.get():
        # the guard flips once every set beating it becomes unaffordable
        X = sorted(others)
        gm, cm, den, vals = _scaled(inst, X)
        good = _exceeds(vals, g, vi, inst.valuation.scale, strict=True)
        _drop_hints(inst, X, good, gm, cm, den, alloc, X)
    return alloc


def _mech_sm_alloc(inst: Instance) -> Allocation:
    _check_size(inst, "Mech-SM")
    return _guarded_alloc(inst, GUARD_MECH_SM, lambda X: opt_brute(inst, X),
                          inst.budget / 2, brute_hints=True)


def _frac_alloc(inst: Instance, provider: OptProvider, eta, beta) -> Allocation:
    return _guarded_alloc(inst, eta, lambda X: provider(inst, X), beta)


def _side_by_opt(inst: Instance, S: frozenset[int], record: Allocation | None = None) -> frozenset[int]:
    """Side with the larger brute-force budgeted optimum (``S`` on ties)."""
    comp = inst.ground - S
    oS, oC = opt_brute(inst, S), opt_brute(inst, comp)
    side = S if oS >= oC else comp
    if record is not None:
        other = oC if side == S else oS
        X = sorted(side)
        gm, cm, den, vals = _scaled(inst, X)
        strict = side != S
        good = _exceeds(vals, 1, other, inst.valuation.scale, strict=strict)
        _drop_hints(inst, X, good, gm, cm, den, record, X)
    return side


def _side_by_frac(inst: Instance, S: frozenset[int], provider: OptProvider) -> frozenset[int]:
    A1 = frozenset(inst.affordable())
    return S if provider(inst, S & A1) >= provider(inst, A1 - S) else inst.ground - S


# ---------------------------------------------------------------- specification objects

@dataclass(frozen=True)
class MechanismSpec:
    name: str
    leaves: Callable[[Instance], list[tuple[Fraction, Hashable]]]
    allocate: Callable[[Instance, Hashable], Allocation]
    sampler: Callable[[Instance, np.random.Generator], Hashable] | None = None
    # overrides threshold payments; only the audit canary uses it
    payment_rule: Callable[[Instance, Allocation], dict[int, Fraction]] | None = None


def _run_leaf(spec: MechanismSpec, inst: Instance, leaf: Hashable, payments: bool,
              engine: PaymentEngine | None) -> MechanismResult:
    if payments:
        alloc = spec.allocate(inst, leaf)
    else:
        token = _want_hints.set(False)
        try:
            alloc = spec.allocate(inst, leaf)
        finally:
            _want_hints.reset(token)
    winners = alloc.winners
    pay = {i: Fraction(0) for i in inst.agents}
    if payments and winners and spec.payment_rule is not None:
        pay.update(spec.payment_rule(inst, alloc))
    elif payments and winners:
        engine = engine or PaymentEngine()
        rule = lambda J: spec.allocate(J, leaf)  # noqa: E731
        key = (spec.name, leaf, id(inst.valuation), inst.ground, inst.budget)
        pay.update(engine.payments(rule, inst, key, alloc))
    return MechanismResult(winners, pay, inst.v(winners), alloc.branch)


def _draw(leaves: list[tuple[Fraction, Hashable]], rng: np.random.Generator) -> Hashable:
    u = Fraction(int(rng.integers(0, 1 << 53)), 1 << 53)
    acc = Fraction(0)
    for p, leaf in leaves:
        acc += p
        if u < acc:
            return leaf
    return leaves[-1][1]


def execute(spec: MechanismSpec, inst: Instance, mode: str = "exact", seed: int | None = None,
            payments: bool = True, engine: PaymentEngine | None = None) -> RandomizedOutcome:
    """Run a mechanism over all leaves (``exact``) or one seeded draw (``sampled``)."""
    if mode == "exact":
        leaves = spec.leaves(inst)
        total = sum((p for p, _ in leaves), Fraction(0))
        if total != 1:
            raise AssertionError(f"{spec.name}: leaf probabilities sum to {total}")
        branches = [(p, _run_leaf(spec, inst, leaf, payments, engine)) for p, leaf in leaves if p]
        return RandomizedOutcome(branches, "exact", None, [leaf for p, leaf in leaves if p])
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        leaf = spec.sampler(inst, rng) if spec.sampler else _draw(spec.leaves(inst), rng)
        return RandomizedOutcome([(Fraction(1), _run_leaf(spec, inst, leaf, payments, engine))],
                                 "sampled", seed, [leaf])
    raise ValueError(f"unknown mode {mode!r}")


def _single(allocate) -> Callable[[Instance], list]:
    return lambda inst: [(Fraction(1), "det")]


_P_SINGLE = Fraction(2, 5)


def _rand_sm_allocate(inst: Instance, leaf) -> Allocation:
    if leaf == "i*":
        return _istar_alloc(inst)
    return _greedy_alloc(inst, inst.budget / 2, "greedy")


RAND_MECH_SM = MechanismSpec(
    "rand-mech-sm",
    lambda inst: [(_P_SINGLE, "i*"), (1 - _P_SINGLE, "greedy")],
    _rand_sm_allocate,
)

MECH_SM = MechanismSpec("mech-sm", _single(None), lambda inst, leaf: _mech_sm_alloc(inst))


def _symsm_allocate(inst: Instance, leaf) -> Allocation:
    _check_size(inst, "SymSM mechanisms")
    S = local_optimum(inst, 0)
    hints = Allocation(frozenset(), "")
    side = _side_by_opt(inst, S, hints if _want_hints.get() else None)
    J = inst.restrict(side)
    if leaf == "det":
        alloc = _mech_sm_alloc(J)
    else:
        alloc = _rand_sm_allocate(J, leaf)
    alloc.merge_hints(hints.hints)
    alloc.branch = ("S: " if side == S else "A-S: ") + alloc.branch
    return alloc


RAND_MECH_SYMSM = MechanismSpec(
    "rand-mech-symsm",
    lambda inst: [(_P_SINGLE, "i*"), (1 - _P_SINGLE, "greedy")],
    _symsm_allocate,
)

DET_MECH_SYMSM = MechanismSpec("det-mech-symsm", _single(None), _symsm_allocate)


def _ucut_allocate(inst: Instance, leaf) -> Allocation:
    side_tag, coin = leaf
    S = local_optimum(inst, 0)
    side = S if side_tag == "S" else inst.ground - S
    alloc = _rand_sm_allocate(inst.restrict(side), coin)
    alloc.branch = f"{side_tag}: {alloc.branch}"
    return alloc


RAND_MECH_UCUT = MechanismSpec(
    "rand-mech-ucut",
    lambda inst: [(Fraction(1, 2) * p, (s, c)) for s in ("S", "A-S")
                  for p, c in ((_P_SINGLE, "i*"), (1 - _P_SINGLE, "greedy"))],
    _ucut_allocate,
)


def default_opt_f(inst: Instance, X) -> Fraction:
    return cut_opt_f(inst, X)


def _det_frac_allocate(inst: Instance, guard, inner_eta, eps_ls, gamma, provider: OptProvider) -> Allocation:
    i = best_singleton(inst)
    if i is None:
        return Allocation(frozenset(), "empty A'")
    A1 = frozenset(inst.affordable())
    g = guard if isinstance(guard, Surd) else Surd(as_fraction(guard))
    if (g * inst.v([i]) - provider(inst, A1 - {i})).sign() >= 0:
        return Allocation(frozenset([i]), "returned i*")
    S = local_optimum(inst, eps_ls)
    side = _side_by_frac(inst, S, provider)
    alloc = _frac_alloc(inst.restrict(side), provider, inner_eta, gamma * inst.budget / 2)
    alloc.branch = ("S: " if side == S else "A-S: ") + alloc.branch
    return alloc


def det_mech_ucut_spec(provider: OptProvider = default_opt_f) -> MechanismSpec:
    inner = 2 + 8 / DET_UCUT_GUARD
    eta_in = eta_of(inner)
    return MechanismSpec(
        "det-mech-ucut", _single(None),
        lambda inst, leaf: _det_frac_allocate(inst, DET_UCUT_GUARD, eta_in, 0, Fraction(1), provider))


def det_mech_symsm_frac_spec(params: FracMechanismParams, provider: OptProvider = default_opt_f,
                             name: str = "det-mech-symsm-frac") -> MechanismSpec:
    eta_in = eta_of(params.inner_rho)
    return MechanismSpec(
        name, _single(None),
        lambda inst, leaf: _det_frac_allocate(inst, params.alpha_exact, eta_in, params.eps_prime,
                                              params.gamma, provider))


# ---------------------------------------------------------------- additive and XOS

P_ADD_SINGLE = Fraction(1, 3)


def _additive_allocate(inst: Instance, leaf) -> Allocation:
    """Best affordable singleton, or the proportional-share greedy over ``A'``."""
    if leaf == "i*":
        return _istar_alloc(inst)
    J = inst.restrict(inst.affordable())
    alloc = _greedy_alloc(J, inst.budget, "proportional share")
    return alloc


ADDITIVE_MECHANISM = MechanismSpec(
    "additive-mechanism",
    lambda inst: [(P_ADD_SINGLE, "i*"), (1 - P_ADD_SINGLE, "greedy")],
    _additive_allocate,
)


@dataclass(frozen=True)
class XosConfig:
    p: Fraction = Fraction(8, 100)
    threshold_divisor: Fraction = Fraction(23, 5)
    kappa: int = 74
    single_item_guard: Fraction = DET_UCUT_GUARD


class _XosTables:
    """Subset values, costs and ``opt(T, B)`` for every ``T`` at one bid vector."""

    def __init__(self, inst: Instance):
        n = inst.n
        if n > BRUTE_CAP:
            raise SizeCapExceeded(f"XOS mechanisms need n <= {BRUTE_CAP}")
        if n > WARN_ABOVE:
            warnings.warn(f"XOS tables over 2^{n} sets", DeskScaleOnly, stacklevel=3)
        self.inst = inst
        cden = 1
        for c in inst.costs + (inst.budget,):
            cden = cden * c.denominator // math.gcd(cden, c.denominator)
        self.cden = cden
        cint = [int(c * cden) for c in inst.costs]
        self.Bn = int(inst.budget * cden)
        size = 1 << n
        masks = np.arange(size, dtype=np.int64)
        C = np.zeros(size, dtype=object)
        for i in range(n):
            C = C + np.where((masks >> i) & 1, cint[i], 0).astype(object)
        self.C = C
        self.V = np.asarray(inst.valuation.table_scaled()).astype(object)
        F = np.where(C <= self.Bn, self.V, 0).astype(object)
        for i in range(n):
            bit = 1 << i
            idx = masks[(masks & bit) != 0]
            F[idx] = np.maximum(F[idx], F[idx ^ bit])
        self.opt = F
        self.masks = masks
        self.demand: dict = {}


_xos_cache: dict = {}


def _xos_tables(inst: Instance) -> _XosTables:
    key = (id(inst.valuation), inst.costs, inst.budget)
    hit = _xos_cache.get(key)
    if hit is not None and hit.inst.valuation is inst.valuation:
        return hit
    if len(_xos_cache) > 64:
        _xos_cache.clear()
    tab = _XosTables(inst)
    _xos_cache[key] = tab
    return tab


def _submasks(m: int) -> np.ndarray:
    bits = [1 << i for i in range(m.bit_length()) if m >> i & 1]
    out = np.zeros(1, dtype=np.int64)
    for b in bits:
        out = np.concatenate([out, out | b])
    return out


def demand_set(inst: Instance, T: int, cfg: XosConfig = XosConfig()) -> tuple[int, Fraction, dict]:
    """``argmax_{S <= A - T} v(S) - t c(S)`` with ``t = opt(T, B) / (divisor * B)``.

    Returns the mask (smallest on ties), ``t`` and per-agent break-even bids.
    """
    tab = _xos_tables(inst)
    hit = tab.demand.get((T, inst.ground, cfg))
    if hit is not None:
        return hit
    ground = inst.ground_mask
    comp = ground & ~T
    O = int(tab.opt[T])
    t = Fraction(O, inst.valuation.scale) / (cfg.threshold_divisor * inst.budget)
    sub = _submasks(comp)
    dv = cfg.threshold_divisor
    # score * scale * cden / (...) as integers: divisor.num * Bn * V - divisor.den * O * C
    score = dv.numerator * tab.Bn * tab.V[sub] - dv.denominator * O * tab.C[sub]
    best = score.max()
    k = int(np.nonzero(score == best)[0][0])
    S = int(sub[k])
    hints = {}
    if O > 0 and _want_hints.get():
        rate = dv.denominator * O
        for i in range(1, inst.n + 1):
            bit = 1 << (i - 1)
            if not S & bit:
                continue
            without = score[(sub & bit) == 0].max()
            slack = Fraction(int(best - without), rate)  # in cden units
            hints[i] = inst.costs[i - 1] + slack / tab.cden
    tab.demand[(T, inst.ground, cfg)] = (S, t, hints)
    return S, t, hints


_clauses: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _clause_valuation(val, k: int) -> AdditiveValuation:
    per = _clauses.setdefault(val, {})
    if k not in per:
        per[k] = AdditiveValuation(val.clauses[k])
    return per[k]


def _sample_allocate(inst: Instance, T: int, coin: str, cfg: XosConfig) -> Allocation:
    S, _, dh = demand_set(inst, T, cfg)
    if S == 0:
        return Allocation(frozenset(), "sample: empty demand set")
    val = inst.valuation
    Sset = from_mask(S)
    k = val.best_clause(Sset)
    add = _clause_valuation(val, k)
    J = Instance(add, inst.costs, inst.budget, ground=Sset)
    alloc = _additive_allocate(J, coin)
    for i, h in dh.items():
        alloc.add_hint(i, h)
    alloc.branch = f"sample clause {k + 1}: {alloc.branch}"
    return alloc


def _xos_leaves(inst: Instance, cfg: XosConfig) -> list[tuple[Fraction, Hashable]]:
    n = inst.n
    ground = inst.ground_mask
    out = [(cfg.p, ("single",))]
    k = len(inst.ground)
    q = (1 - cfg.p) / (1 << k)
    for T in _submasks(ground):
        for pc, coin in ((P_ADD_SINGLE, "i*"), (1 - P_ADD_SINGLE, "greedy")):
            out.append((q * pc, ("sample", int(T), coin)))
    del n
    return out


def _xos_sampler(cfg: XosConfig):
    def draw(inst: Instance, rng: np.random.Generator):
        u = Fraction(int(rng.integers(0, 1 << 53)), 1 << 53)
        if u < cfg.p:
            return ("single",)
        T = 0
        for i in inst.agents:
            if rng.integers(0, 2):
                T |= 1 << (i - 1)
        coin = "i*" if Fraction(int(rng.integers(0, 1 << 53)), 1 << 53) < P_ADD_SINGLE else "greedy"
        return ("sample", T, coin)
    return draw


def main_xos_spec(cfg: XosConfig = XosConfig()) -> MechanismSpec:
    def allocate(inst: Instance, leaf):
        if leaf[0] == "single":
            return _istar_alloc(inst)
        return _sample_allocate(inst, leaf[1], leaf[2], cfg)
    return MechanismSpec("main-xos", lambda inst: _xos_leaves(inst, cfg), allocate, _xos_sampler(cfg))


# ---------------------------------------------------------------- public entry points

def rand_mech_sm(inst: Instance, mode: str = "exact", seed=None, payments: bool = True) -> RandomizedOutcome:
    return execute(RAND_MECH_SM, inst, mode, seed, payments)


def _det(spec: MechanismSpec, inst: Instance, payments: bool) -> MechanismResult:
    return execute(spec, inst, "exact", None, payments).branches[0][1]


def mech_sm(inst: Instance, payments: bool = True) -> MechanismResult:
    return _det(MECH_SM, inst, payments)


def mech_sm_frac(inst: Instance, opt_f_provider: OptProvider = default_opt_f,
                 params: FracMechanismParams | None = None, payments: bool = True) -> MechanismResult:
    return mech_sm_frac_var(inst, opt_f_provider, params, Fraction(1), payments)


def mech_sm_frac_var(inst: Instance, opt_f_provider: OptProvider = default_opt_f,
                     params: FracMechanismParams | None = None, gamma=1,
                     payments: bool = True) -> MechanismResult:
    rho = params.inner_rho if params is not None else Fraction(4)
    e = eta_of(rho)
    gamma = as_fraction(gamma)
    spec = MechanismSpec(f"mech-sm-frac-var[{rho},{gamma}]", _single(None),
                         lambda J, leaf: _frac_alloc(J, opt_f_provider, e, gamma * J.budget / 2))
    return _det(spec, inst, payments)


def det_mech_symsm(inst: Instance, payments: bool = True) -> MechanismResult:
    return _det(DET_MECH_SYMSM, inst, payments)


def rand_mech_symsm(inst: Instance, mode: str = "exact", seed=None, payments: bool = True) -> RandomizedOutcome:
    return execute(RAND_MECH_SYMSM, inst, mode, seed, payments)


def rand_mech_ucut(inst: Instance, mode: str = "exact", seed=None, payments: bool = True) -> RandomizedOutcome:
    return execute(RAND_MECH_UCUT, inst, mode, seed, payments)


def det_mech_ucut(inst: Instance, opt_f_provider: OptProvider = default_opt_f,
                  payments: bool = True) -> MechanismResult:
    return _det(det_mech_ucut_spec(opt_f_provider), inst, payments)


def det_mech_symsm_frac(inst: Instance, opt_f_provider: OptProvider = default_opt_f,
                        params: FracMechanismParams | None = None, payments: bool = True) -> MechanismResult:
    params = params or FracMechanismParams.generic(4, 1)
    return _det(det_mech_symsm_frac_spec(params, opt_f_provider), inst, payments)


def additive_mechanism(inst: Instance, mode: str = "exact", seed=None, payments: bool = True) -> RandomizedOutcome:
    if inst.valuation.kind != "additive":
        raise TypeError("additive_mechanism needs an additive valuation")
    return execute(ADDITIVE_MECHANISM, inst, mode, seed, payments)


def sample_xos(inst: Instance, T=None, coin: str | None = None, seed=None,
               cfg: XosConfig = XosConfig(), payments: bool = True) -> MechanismResult:
    """One run with a fixed sample ``T`` and additive-mechanism coin (drawn from ``seed`` if absent)."""
    if inst.valuation.kind != "xos":
        raise TypeError("sample_xos needs an XOS valuation")
    rng = np.random.default_rng(seed)
    if T is None:
        T = frozenset(i for i in inst.agents if rng.integers(0, 2))
    if coin is None:
        coin = "i*" if Fraction(int(rng.integers(0, 1 << 53)), 1 << 53) < P_ADD_SINGLE else "greedy"
    Tm = 0
    for i in T:
        Tm |= 1 << (i - 1)
    spec = MechanismSpec("sample-xos", _single(None),
                         lambda J, leaf: _sample_allocate(J, Tm, coin, cfg))
    return _det(spec, inst, payments)


def main_xos(inst: Instance, mode: str = "exact", seed=None, cfg: XosConfig = XosConfig(),
             payments: bool = True) -> RandomizedOutcome:
    if inst.valuation.kind != "xos":
        raise TypeError("main_xos needs an XOS valuation")
    return execute(main_xos_spec(cfg), inst, mode, seed, payments)


def registry(eps=Fraction(1, 200)) -> dict[str, MechanismSpec]:
    """Mechanisms addressable by name from the harness and the CLI."""
    return {
        "rand-mech-sm": RAND_MECH_SM,
        "mech-sm": MECH_SM,
        "rand-mech-symsm": RAND_MECH_SYMSM,
        "det-mech-symsm": DET_MECH_SYMSM,
        "rand-mech-ucut": RAND_MECH_UCUT,
        "det-mech-ucut": det_mech_ucut_spec(),
        "det-mech-symsm-frac": det_mech_symsm_frac_spec(FracMechanismParams.generic(4, 1)),
        "det-mech-wcut-tuned": det_mech_symsm_frac_spec(FracMechanismParams.tuned_cut(eps),
                                                        name="det-mech-wcut-tuned"),
        "additive-mechanism": ADDITIVE_MECHANISM,
        "main-xos": main_xos_spec(),
    }
