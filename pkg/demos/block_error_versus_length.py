"""
Block error of random linear relaying
=====================================

Each trial draws a random source codebook and a random linear map at each
relay, then checks whether the destination can single out the sent message.
Below capacity the error shrinks as the block length grows; above it the
error heads to one.
"""

from relaynet import SimConfig, linear_capacity, run_blocks
from relaynet.catalog import diamond_linear

net = diamond_linear()
C = linear_capacity(net).value
print(f"capacity {C:.3f} bits per use")

for frac in (0.5, 0.8, 1.2):
    row = []
    for n in (4, 8, 16, 32):
        rep = run_blocks(net, SimConfig(n=n, R=frac * C, trials=200, seed=0))
        row.append(f"n={n}: {rep.error_rate:.3f}")
    print(f"R = {frac:.1f} C  ", "  ".join(row))
