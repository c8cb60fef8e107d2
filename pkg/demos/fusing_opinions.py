import numpy as np

from evfusion import (SubjectiveOpinion, fuse_bcf, fuse_cbf, fuse_dbf, fuse_gbaf,
                      opinion_from_evidence, projected_probabilities)

# evidence -> opinion: b = e / S, u = K / S
op = opinion_from_evidence([4.0, 1.0, 0.0])
print(op.beliefs, op.uncertainty)
print(projected_probabilities(op).probs)

# two sources that are sure of different things
first = SubjectiveOpinion([0.99, 0.0, 0.01], 0.0)
second = SubjectiveOpinion([0.0, 0.99, 0.01], 0.0)

# Dempster puts everything on the one class both barely support
print("bcf", fuse_bcf(first, second).beliefs)
# averaging and cumulative rules split the difference and stay certain
print("cbf", fuse_cbf([first, second]).beliefs)
print("gbaf", fuse_gbaf([first, second]).beliefs)

# discounting turns the disagreement into uncertainty
for lam in (1.0, 3.0, 10.0):
    fused, diag = fuse_dbf([first, second], lam)
    print(f"dbf lambda={lam:<4} u={fused.uncertainty:.4f} eta={diag.discount.eta}")

# a vacuous source does not cause any discounting
fused, diag = fuse_dbf([opinion_from_evidence([6.0, 1.0, 1.0]), SubjectiveOpinion.vacuous(3)])
print(diag.conflict.dc, fused.uncertainty)

# three sources, one dissenting: only the dissenter's row of agreements is small
ops = [opinion_from_evidence(e) for e in ([9.0, 1.0, 0.0], [8.0, 0.0, 1.0], [0.0, 10.0, 0.0])]
_, diag = fuse_dbf(ops)
print(np.round(diag.agreement.a, 3))
print(np.round(diag.discount.eta, 3))
