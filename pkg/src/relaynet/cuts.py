"""Cuts, cut boundaries and transfer matrices of linear networks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .field import FFMatrix
from .network import LINEAR, Network, NetworkError

MAX_CUT_NODES = 26


class CutError(ValueError):
    pass


class TooManyNodes(CutError):
    """Exhaustive cut enumeration would exceed the node cap."""


def format_nodes(nodes) -> str:
    return "{" + ",".join(str(v) for v in sorted(nodes)) + "}"


@dataclass(frozen=True)
class Cut:
    """Node set U with the source inside and ``destination`` outside."""

    destination: int
    members: frozenset
    senders: tuple[int, ...]
    receivers: tuple[int, ...]

    @property
    def label(self) -> str:
        return format_nodes(self.members)

    def complement(self, net: Network) -> tuple[int, ...]:
        return tuple(v for v in net.nodes if v not in self.members)

    def crossing_edges(self, net: Network) -> list[int]:
        """Indices (into ``net.edges``) of edges leaving U."""
        return [i for i, (u, v) in enumerate(net.edges) if u in self.members and v not in self.members]


def boundary(net: Network, members, destination: int | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Sender boundary of U and receiver boundary of its complement, ascending."""
    U = frozenset(members)
    if 1 not in U:
        raise CutError(f"cut {format_nodes(U)} does not contain the source")
    if destination is not None and destination in U:
        raise CutError(f"cut {format_nodes(U)} contains destination {destination}")
    senders = sorted({u for u, v in net.edges if u in U and v not in U})
    receivers = sorted({v for u, v in net.edges if u in U and v not in U})
    return tuple(senders), tuple(receivers)


def make_cut(net: Network, members, destination: int) -> Cut:
    s, r = boundary(net, members, destination)
    return Cut(destination, frozenset(members), s, r)


def enumerate_cuts(net: Network, d: int, max_nodes: int = MAX_CUT_NODES) -> Iterator[Cut]:
    """All 2**(|V|-2) cuts for destination ``d`` in ascending-bitmask order.

    Bit i of the mask selects the i-th smallest node other than 1 and ``d``.
    """
    if d not in net.nodes or d == 1:
        raise CutError(f"{d} is not a valid destination")
    if net.n_nodes > max_nodes:
        raise TooManyNodes(
            f"{net.n_nodes} nodes exceeds the cut-enumeration cap of {max_nodes}; "
            "Monte Carlo rank estimates still work per cut but the exhaustive min-cut search is infeasible"
        )
    others = [v for v in net.nodes if v not in (1, d)]
    for mask in range(1 << len(others)):
        members = {1} | {v for i, v in enumerate(others) if mask >> i & 1}
        yield make_cut(net, members, d)


def all_cuts(net: Network, max_nodes: int = MAX_CUT_NODES) -> dict[int, list[Cut]]:
    return {d: list(enumerate_cuts(net, d, max_nodes)) for d in net.destinations}


@dataclass(frozen=True)
class TransferMatrixView:
    """Maps a state assignment to the cut's transfer matrix.

    Rows follow the receiver boundary, columns the sender boundary, both in
    ascending node order; entry (v, u) is the state of edge (u, v) when that
    edge crosses the cut and 0 otherwise.
    """

    net: Network
    cut: Cut

    def __post_init__(self):
        if self.net.mode != LINEAR:
            raise NetworkError("transfer matrices exist only for linear networks")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cut.receivers), len(self.cut.senders)

    def crossing(self) -> list[tuple[int, int, int]]:
        """(edge index, row, column) for every crossing edge."""
        rows = {v: i for i, v in enumerate(self.cut.receivers)}
        cols = {u: j for j, u in enumerate(self.cut.senders)}
        return [(i, rows[v], cols[u]) for i, (u, v) in enumerate(self.net.edges)
                if u in self.cut.members and v not in self.cut.members]

    def assemble_batch(self, states) -> np.ndarray:
        """Matrices for a batch of full state assignments, shape (B, rows, cols)."""
        s = np.asarray(states, dtype=np.int64)
        if s.ndim == 1:
            s = s[None, :]
        out = np.zeros((s.shape[0],) + self.shape, dtype=np.int64)
        for e, r, c in self.crossing():
            out[:, r, c] = s[:, e]
        return out


def transfer_matrix(view: TransferMatrixView, s) -> FFMatrix:
    """Transfer matrix of the cut under state ``s``.

    ``s`` is either a full assignment aligned with ``net.edges`` or a dict
    keyed by edge; the dict must cover every crossing edge.
    """
    net = view.net
    if isinstance(s, dict):
        full = np.zeros(len(net.edges), dtype=np.int64)
        for e, r, c in view.crossing():
            edge = net.edges[e]
            if edge not in s:
                raise CutError(f"state assignment lacks crossing edge {edge}")
            full[e] = s[edge]
    else:
        full = np.asarray(s, dtype=np.int64)
        if full.shape != (len(net.edges),):
            raise CutError(f"state assignment must have {len(net.edges)} components")
    return FFMatrix(net.field, view.assemble_batch(full)[0])
