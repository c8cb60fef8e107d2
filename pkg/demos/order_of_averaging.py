import itertools

from evfusion import baf_evidence_sequential, fuse_baf_sequential, fuse_gbaf, gbaf_evidence
from evfusion import opinion_from_evidence

evidence = [3.0, 5.0, 10.0]

# pairwise averaging halves earlier sources at every step
for order in itertools.permutations(evidence):
    print(order, baf_evidence_sequential([[e] for e in order]).evidence[0])

# averaging all sources at once is just the mean
print("simultaneous", gbaf_evidence([[e] for e in evidence]).evidence[0])

# same thing on opinions over two classes
ops = [opinion_from_evidence([e, 0.0]) for e in evidence]
seq = fuse_baf_sequential(ops)
print("sequential u", seq.uncertainty, "simultaneous u", fuse_gbaf(ops).uncertainty)
print("simultaneous u reversed", fuse_gbaf(ops[::-1]).uncertainty)
