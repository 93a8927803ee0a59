"""
Capacity of a small fading relay network
========================================

Four nodes, five links, and every link coefficient is an independent fair
coin over GF(2).  The capacity is the smallest expected rank among the cut
transfer matrices, so we list every cut and its expected rank.
"""

import numpy as np

from relaynet import enumerate_cuts, expected_rank, linear_capacity, linear_network
from relaynet.catalog import bridge

net = bridge()
print("edges:", net.edges)

for cut in enumerate_cuts(net, 4):
    exact = expected_rank(net, cut)
    mc = expected_rank(net, cut, "montecarlo", samples=20_000, seed=1)
    print(f"cut {cut.label:9s} exact E[rank]={exact.value:.4f}  "
          f"monte carlo={mc.value:.4f} +/- {mc.half_width:.4f}")

report = linear_capacity(net)
print("capacity (bits/use):", report.value, "attained at", [c.label for c in report.argmin[4]])

# Sweeping the link reliability shows capacity tracking the weakest cut.
for p_on in np.linspace(0.1, 0.9, 5):
    pmfs = {e: (1 - p_on, p_on) for e in net.edges}
    swept = linear_network(4, pmfs, [4], net.field)
    print(f"P(coefficient = 1) = {p_on:.1f}  capacity = {linear_capacity(swept).value:.4f}")
