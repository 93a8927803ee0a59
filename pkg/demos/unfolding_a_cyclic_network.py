"""
Unfolding a network with a cycle
================================

Relays 2 and 3 talk to each other, so path lengths from the source are not
unique and block pipelining does not apply directly.  Unfolding over T
stages gives a layered network; its cut values, normalised by T, stay
pinned to the original min cut.
"""

from relaynet import unfold, verify_normalized_rate, verify_sandwich
from relaynet.catalog import cyclic4

net = cyclic4()
for T in (1, 2, 3, 4):
    unf = unfold(net, T)
    lay = unf.layering()
    print(f"T={T}: {len(unf.copies)} copies in {lay.L} layers, last layer {lay.layers[-1]}")

print()
for T in range(1, 6):
    nr = verify_normalized_rate(net, T)
    sw = verify_sandwich(net, T)
    print(f"T={T}: steady/T={nr.normalized_steady:.4f} min/T={nr.normalized:.4f} "
          f"lower coefficient={sw.lower_coefficient} sandwich ok={sw.passed}")
