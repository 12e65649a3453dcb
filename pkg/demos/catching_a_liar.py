"""
Why payments matter: auditing a pay-your-bid greedy
===================================================

"""

from bfmech.oracle import CANARY, GREEDY_SM, audit_mechanism
from bfmech.valuations import AdditiveValuation, Instance

inst = Instance(AdditiveValuation([6, 4, 1]), costs=(1, 1, 1), budget=4)

# same allocation rule, two payment rules
for spec in (GREEDY_SM, CANARY):
    rep = audit_mechanism(spec, inst)
    print(spec.name, "passes" if rep.passed else "FAILS")
    for check in rep.checks:
        print("   ", check.prop, check.verdict)

# the witness is replayable: overbidding raises the seller's utility
w = audit_mechanism(CANARY, inst).failures()[0].witness
print("agent", w["agent"], "bids", w["bid"], "instead of", w["cost"],
      "and gains", w["utility"] - w["truthful_utility"])
