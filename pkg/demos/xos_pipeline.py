"""
XOS sellers: sample, price, then run the additive mechanism
===========================================================

"""

from bfmech.exhaustive import brute_opt
from bfmech.mechanisms import additive_mechanism, demand_set, main_xos
from bfmech.valuations import AdditiveValuation, Instance, XosValuation, from_mask, to_mask

# an XOS value is the best of a few additive "clauses"
v = XosValuation([[4, 1, 3, 0, 2], [1, 5, 0, 3, 1], [2, 2, 2, 2, 2]])
inst = Instance(v, costs=(2, 3, 1, 2, 1), budget=4)
print("opt", brute_opt(inst)[0])

# one draw: agents 1 and 2 form the sample T, they only set the price
T = to_mask([1, 2])
S, t, _ = demand_set(inst, T)
print("price per unit cost", t, "demand set", sorted(from_mask(S)))

# the full mechanism enumerates every sample and coin exactly
out = main_xos(inst, payments=False)
print("Main-XOS expectation", out.expectation, "over", len(out.branches), "leaves")

# the additive building block on its own
add = Instance(AdditiveValuation([6, 4, 1]), (2, 2, 1), 4)
for p, res in additive_mechanism(add).branches:
    print(f"  with prob {p}: winners {sorted(res.winners)}, paid {res.total_payment}")
