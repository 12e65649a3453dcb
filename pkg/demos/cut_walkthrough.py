"""
Procuring a cut: from local search to a truthful mechanism
==========================================================

"""

from fractions import Fraction

from bfmech.algorithms import ls_greedy
from bfmech.exhaustive import brute_opt
from bfmech.mechanisms import det_mech_symsm, rand_mech_ucut
from bfmech.valuations import CutValuation, Instance

# five sellers, value of a set = weight of the edges it cuts
v = CutValuation(5, [(1, 2, 3), (1, 3, 1), (2, 4, 2), (3, 4, 4), (4, 5, 2), (2, 5, 1)])
inst = Instance(v, costs=(2, 3, 1, 4, 2), budget=5)

opt, best = brute_opt(inst)
print("opt", opt, "with", sorted(best))

# the algorithm (no payments): local search splits A, greedy runs on each side
S, rep = ls_greedy(inst, Fraction(1, 10))
print("LS-Greedy picks", sorted(S), "value", inst.v(S), "sides", rep.side_values)

# a deterministic truthful mechanism; payments are threshold bids
res = det_mech_symsm(inst)
print("Det-Mech-SymSM winners", sorted(res.winners), "branch", res.branch_tag)
for i in sorted(res.winners):
    print(f"  seller {i}: bid {inst.cost(i)}, paid {res.payments[i]}")
print("  total paid", res.total_payment, "of budget", inst.budget)

# the randomized unweighted-cut mechanism, all leaves enumerated
unit = Instance(CutValuation(5, [(i, j, 1) for (i, j) in v.weights]), inst.costs, inst.budget)
out = rand_mech_ucut(unit)
print("Rand-Mech-UCut expectation", out.expectation, "vs opt", brute_opt(unit)[0])
