from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bfmech.exhaustive import brute_opt
from bfmech.generators import generate
from bfmech.greedy import greedy_sm
from bfmech.mechanisms import (
    FracMechanismParams,
    TUNED_ALPHA,
    _frac_inequality_holds,
    best_singleton,
    det_mech_symsm,
    det_mech_symsm_frac,
    execute,
    det_mech_ucut,
    local_optimum,
    mech_sm,
    mech_sm_frac,
    mech_sm_frac_var,
    rand_mech_sm,
    rand_mech_symsm,
    rand_mech_ucut,
    registry,
    solve_eps_prime,
)
from bfmech.oracle import RATIO_BOUNDS, exact_expectation, ratio_of
from bfmech.structure import knapsack_to_cut
from bfmech.surd import SQRT6, Surd, alpha as alpha_of
from bfmech.valuations import AdditiveValuation, CutValuation, Instance, TabularValuation
from conftest import additive_instances, cut_instances, k3


def brute_provider(inst, X):
    return brute_opt(inst, X)[0]


def _budget_ok(res, inst):
    assert res.total_payment <= inst.budget
    for i in inst.agents:
        if i in res.winners:
            assert res.payments[i] >= inst.cost(i)
        else:
            assert res.payments[i] == 0


# ------------------------------------------------------------- Rand-Mech-SM / Mech-SM

def test_rand_mech_sm_additive(add641):
    out = rand_mech_sm(add641)
    assert [p for p, _ in out.branches] == [Fraction(2, 5), Fraction(3, 5)]
    assert [r.value for _, r in out.branches] == [6, 6]
    assert exact_expectation(out) == 6
    assert out.branches[0][1].payments[1] == 4


def test_rand_mech_sm_empty_affordable():
    inst = Instance(AdditiveValuation([3, 4]), (5, 6), 4)
    out = rand_mech_sm(inst)
    assert exact_expectation(out) == 0
    assert all(not r.winners for _, r in out.branches)


def test_mech_sm_dominant_item():
    inst = Instance(AdditiveValuation([100, 1, 1]), (3, 1, 1), 4)
    res = mech_sm(inst)
    assert res.winners == frozenset({1}) and res.branch_tag == "returned i*"
    assert res.payments[1] == 4


def test_mech_sm_guard_tie_returns_istar():
    # (2 + sqrt 6) * 0 >= 0
    inst = Instance(TabularValuation([0] * 8), (1, 1, 1), 4)
    assert mech_sm(inst).branch_tag == "returned i*"


def test_mech_sm_greedy_branch():
    inst = Instance(AdditiveValuation([5] * 8), (1,) * 8, 10)
    res = mech_sm(inst)
    assert res.branch_tag == "greedy"
    _budget_ok(res, inst)


@given(additive_instances(n_max=7))
def test_mech_sm_ratio(inst):
    res = mech_sm(inst, payments=False)
    r = ratio_of(brute_opt(inst)[0], res.value)
    assert r is not None and r <= (3 + SQRT6).upper()


@given(additive_instances(n_max=7))
def test_rand_mech_sm_ratio(inst):
    out = rand_mech_sm(inst, payments=False)
    assert 5 * out.expectation >= brute_opt(inst)[0]


@given(additive_instances(n_max=6))
def test_rand_mech_sm_budget(inst):
    for _, res in rand_mech_sm(inst).branches:
        _budget_ok(res, inst)


# ------------------------------------------------------------- fractional variants

@given(cut_instances(n_max=6))
def test_rho_one_with_exact_opt_is_mech_sm(inst):
    params = FracMechanismParams.generic(1, 1)
    a = mech_sm_frac(inst, brute_provider, params, payments=False)
    b = mech_sm(inst, payments=False)
    assert (a.winners, a.branch_tag) == (b.winners, b.branch_tag)


@given(cut_instances(n_max=6))
def test_var_gamma_one_matches_frac(inst):
    a = mech_sm_frac_var(inst, gamma=1, payments=False)
    b = mech_sm_frac(inst, payments=False)
    assert a.winners == b.winners


@given(cut_instances(n_max=6))
def test_var_half_gamma_is_prefix(inst):
    full = mech_sm_frac_var(inst, gamma=1, payments=False)
    half = mech_sm_frac_var(inst, gamma=Fraction(1, 2), payments=False)
    if full.branch_tag == "greedy":
        assert half.winners <= full.winners
        _, tr = greedy_sm(inst, inst.budget / 2)
        order = [i for _, i, _ in tr.accepted]
        assert set(order[:len(half.winners)]) == half.winners


def test_var_empty_affordable():
    inst = Instance(k3(), (5, 5, 5), 1)
    assert mech_sm_frac_var(inst, gamma=Fraction(1, 2)).winners == frozenset()


@given(cut_instances(n_max=7))
def test_frac_rho4_ratio(inst):
    res = mech_sm_frac(inst, payments=False)
    rho = 4
    bound = (rho + 2 + Surd.sqrt(rho * rho + 4 * rho + 1)).upper()
    r = ratio_of(brute_opt(inst)[0], res.value)
    assert r is not None and r <= bound


def test_frac_guard_equality_returns_istar(k3_inst):
    inst = Instance(k3(), (1, 1, 1), 4)
    eta = 4 + 1 + Surd.sqrt(33)
    assert mech_sm_frac(inst, lambda J, X: Fraction(0), payments=False).branch_tag == "returned i*"
    big = (eta * 2).upper() + 1
    assert mech_sm_frac(inst, lambda J, X: big, payments=False).branch_tag == "greedy"


# ------------------------------------------------------------- symmetric submodular

def test_symsm_k3():
    inst = Instance(k3(), (1, 1, 1), 1)
    assert det_mech_symsm(inst).value == 2
    # greedy with B/2 rejects every unit-cost vertex, so only the i* coin pays off
    assert exact_expectation(rand_mech_symsm(inst)) == Fraction(4, 5)


def test_symsm_single_agent():
    inst = Instance(CutValuation(1), (1,), 2)
    assert det_mech_symsm(inst).winners == frozenset({1})


@given(cut_instances(n_max=7))
def test_symsm_ratios(inst):
    opt = brute_opt(inst)[0]
    det = det_mech_symsm(inst, payments=False).value
    rnd = rand_mech_symsm(inst, payments=False).expectation
    assert opt <= (6 + 2 * SQRT6).upper() * det
    assert opt <= 10 * rnd


@given(cut_instances(n_max=6))
def test_symsm_budget(inst):
    _budget_ok(det_mech_symsm(inst), inst)
    for _, res in rand_mech_symsm(inst).branches:
        _budget_ok(res, inst)


# ------------------------------------------------------------- unweighted cut

def test_ucut_k3():
    inst = Instance(k3(), (1, 1, 1), 1)
    out = rand_mech_ucut(inst)
    assert len(out.branches) == 4
    assert [r.value for _, r in out.branches] == [2, 0, 2, 0]
    assert exact_expectation(out) == Fraction(4, 5)
    assert 10 * exact_expectation(out) >= brute_opt(inst)[0]


def test_ucut_single_agent():
    inst = Instance(CutValuation(1), (1,), 2)
    out = rand_mech_ucut(inst)
    assert {r.winners for _, r in out.branches if r.branch_tag.endswith("i*")} == {frozenset({1})}
    assert exact_expectation(out) == 0 == brute_opt(inst)[0]


@given(cut_instances(n_max=8, unit=True))
def test_ucut_expectation_identity(inst):
    S = local_optimum(inst)
    total = Fraction(0)
    for side in (S, frozenset(inst.agents) - S):
        J = inst.restrict(side)
        X = greedy_sm(J, J.budget / 2)[0]
        i = best_singleton(J)
        total += Fraction(3, 10) * inst.v(X) + Fraction(2, 10) * (inst.v([i]) if i else 0)
    assert rand_mech_ucut(inst, payments=False).expectation == total


@given(cut_instances(n_max=8, unit=True))
def test_ucut_ratio(inst):
    assert brute_opt(inst)[0] <= 10 * rand_mech_ucut(inst, payments=False).expectation


def test_det_ucut_star():
    inst = knapsack_to_cut((3, 2), (1, 2), 2)
    res = det_mech_ucut(inst)
    _budget_ok(res, inst)
    assert brute_opt(inst)[0] <= Fraction(109, 4) * res.value


def test_det_ucut_dominant_edge():
    inst = knapsack_to_cut((100, 1, 1), (1, 1, 1), 2)
    res = det_mech_ucut(inst)
    assert res.winners == frozenset({1}) and res.payments[1] == 2


def test_det_ucut_guard_is_weak_inequality():
    inst = Instance(CutValuation(3, [(1, 2, 4), (2, 3, 1)]), (1, 1, 1), 4)
    # i* = 2 with v = 5; 105/4 * 5 = 525/4
    assert det_mech_ucut(inst, lambda J, X: Fraction(525, 4), payments=False).branch_tag == "returned i*"
    tag = det_mech_ucut(inst, lambda J, X: Fraction(526, 4), payments=False).branch_tag
    assert tag != "returned i*"


@given(cut_instances(n_max=7))
def test_det_ucut_ratio_and_budget(inst):
    res = det_mech_ucut(inst)
    _budget_ok(res, inst)
    r = ratio_of(brute_opt(inst)[0], res.value)
    assert r is not None and r <= RATIO_BOUNDS["det-mech-ucut"]


# ------------------------------------------------------------- parameters

def test_alpha_at_four():
    p = FracMechanismParams.generic(4, 1)
    assert p.alpha_exact == 29 + 5 * Surd.sqrt(33)
    assert Fraction(5772, 100) < p.alpha < Fraction(5773, 100)
    assert p.check()


def test_eps_prime_rho_one():
    e = solve_eps_prime(1, 1)
    assert e >= Fraction(1, 1 << 20)
    assert _frac_inequality_holds(1, 1, e, alpha_of(1))
    assert _frac_inequality_holds(1, 1, e / 2, alpha_of(1))


@given(st.sampled_from([1, 2, 4]), st.sampled_from([Fraction(1), Fraction(1, 10), Fraction(1, 1000)]))
def test_eps_prime_halving_keeps_inequality(rho, eps):
    e = solve_eps_prime(rho, eps)
    for k in range(1, 6):
        assert _frac_inequality_holds(rho, eps, e / (1 << k), alpha_of(rho))


def test_eps_prime_shrinks_with_eps():
    es = [solve_eps_prime(4, Fraction(1, 10 ** k)) for k in range(4)]
    assert es == sorted(es, reverse=True) and es[-1] < es[0]


def test_eps_prime_rejects_nonpositive():
    with pytest.raises(ValueError):
        solve_eps_prime(1, 0)


def test_tuned_params():
    p = FracMechanismParams.tuned_cut(Fraction(1, 200))
    assert p.alpha == TUNED_ALPHA == Fraction(5249, 200)
    assert p.inner_rho == 2 + 8 / TUNED_ALPHA
    assert p.check()
    assert p.gamma == 1 - (TUNED_ALPHA + 2) * p.eps_prime


@given(cut_instances(n_max=6))
def test_symsm_frac_generic_ratio(inst):
    res = det_mech_symsm_frac(inst)
    _budget_ok(res, inst)
    r = ratio_of(brute_opt(inst)[0], res.value)
    assert r is not None and r <= Fraction(5872, 100)


def test_symsm_frac_single_agent():
    inst = Instance(CutValuation(1), (1,), 2)
    assert det_mech_symsm_frac(inst).winners == frozenset({1})


@given(cut_instances(n_max=6))
def test_tuned_ratio(inst):
    from bfmech.mechanisms import det_mech_symsm_frac_spec, execute
    spec = det_mech_symsm_frac_spec(FracMechanismParams.tuned_cut(Fraction(1, 200)))
    res = execute(spec, inst).branches[0][1]
    _budget_ok(res, inst)
    r = ratio_of(brute_opt(inst)[0], res.value)
    assert r is not None and r <= Fraction(109, 4)


@pytest.mark.parametrize("name, family", [
    ("rand-mech-sm", "random-additive"),
    ("rand-mech-symsm", "erdos-renyi-cut"),
    ("rand-mech-ucut", "erdos-renyi-cut"),
    ("additive-mechanism", "random-additive"),
    ("main-xos", "random-xos"),
])
def test_sampled_mean_tracks_exact(name, family):
    spec = registry()[name]
    inst = generate(family, 6, 17)
    exact = execute(spec, inst, payments=False).expectation
    draws = [execute(spec, inst, "sampled", seed=s, payments=False).expectation for s in range(10_000)]
    assert abs(sum(draws) / len(draws) - exact) <= exact / 20
