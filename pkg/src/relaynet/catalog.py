"""Small reference networks used by the demos, tests and sample files."""

from __future__ import annotations

from .field import field_create
from .network import GENERAL, ChannelTable, Network, StateModel, linear_network

HALF = (0.5, 0.5)


def bridge(q: int = 2, pmf=HALF) -> Network:
    """Four-node erasure-style network: 1->2, 1->3, 2->3, 2->4, 3->4, destination 4."""
    edges = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]
    return linear_network(4, {e: pmf for e in edges}, [4], field_create(q)).check()


def diamond_linear(q: int = 2, pmf=HALF) -> Network:
    """Source 1, relays 2 and 3, destination 4."""
    edges = [(1, 2), (1, 3), (2, 4), (3, 4)]
    return linear_network(4, {e: pmf for e in edges}, [4], field_create(q)).check()


def cyclic4(q: int = 2, pmf=HALF) -> Network:
    """Diamond plus the relay links 2->3 and 3->2 (not layered)."""
    edges = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 2), (3, 4)]
    return linear_network(4, {e: pmf for e in edges}, [4], field_create(q)).check()


def chain(erasures, q: int = 2) -> Network:
    """Line network 1 -> 2 -> ... with per-link erasure probabilities."""
    from .network import erasure_to_linear

    n = len(erasures) + 1
    return erasure_to_linear(n, {(i, i + 1): e for i, e in enumerate(erasures, 1)}, [n], field_create(q)).check()


def diamond_general() -> Network:
    """Deterministic binary diamond in general mode.

    Both relays observe the source bit.  Relay 3 has a one-letter input
    alphabet, so the destination's observation X_2 xor X_3 carries relay 2's
    bit only.
    """
    edges = [(1, 2), (1, 3), (2, 4), (3, 4)]
    sm = StateModel.iid({e: (1.0,) for e in edges})
    alph = {1: (2, 1), 2: (2, 2), 3: (1, 2), 4: (1, 2)}
    tables = {
        2: ChannelTable.from_function(2, (2,), (1,), 2, lambda x, s: x[0]),
        3: ChannelTable.from_function(3, (2,), (1,), 2, lambda x, s: x[0]),
        4: ChannelTable.from_function(4, (2, 1), (1, 1), 2, lambda x, s: x[0] ^ x[1]),
    }
    return Network(4, tuple(edges), (4,), GENERAL, sm, alphabets=alph, tables=tables).check()


def diamond_erasure_general(erase: float = 0.5) -> Network:
    """Binary erasure-style diamond in general mode: Y_v = sum of S_uv * X_u mod 2."""
    edges = [(1, 2), (1, 3), (2, 4), (3, 4)]
    pmf = (erase, 1.0 - erase)
    sm = StateModel.iid({e: pmf for e in edges})
    alph = {1: (2, 1), 2: (2, 2), 3: (2, 2), 4: (1, 2)}
    tables = {
        2: ChannelTable.from_function(2, (2,), (2,), 2, lambda x, s: x[0] * s[0]),
        3: ChannelTable.from_function(3, (2,), (2,), 2, lambda x, s: x[0] * s[0]),
        4: ChannelTable.from_function(4, (2, 2), (2, 2), 2, lambda x, s: (x[0] * s[0]) ^ (x[1] * s[1])),
    }
    return Network(4, tuple(edges), (4,), GENERAL, sm, alphabets=alph, tables=tables).check()


CATALOG = {
    "bridge": bridge,
    "diamond": diamond_linear,
    "cyclic4": cyclic4,
    "diamond-general": diamond_general,
    "diamond-erasure-general": diamond_erasure_general,
}
