"""Relay network description: topology, state law and per-node channels.

Nodes are numbered ``1..n_nodes`` and node 1 is the source.  In linear mode
every node observes the GF(q) sum of its in-neighbours' inputs weighted by
the edge states; in general mode each node owns an explicit lookup table
from (in-neighbour inputs, incoming edge states) to its observation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

import numpy as np

from .field import Field

LINEAR = "linear"
GENERAL = "general"
PMF_TOL = 1e-12

Edge = tuple[int, int]


class NetworkError(ValueError):
    """Invalid network description.  ``diagnostics`` lists every problem."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class NotLayered(ValueError):
    """Raised by :func:`compute_layers`; carries a witness node and two path lengths."""

    def __init__(self, node, lengths, reason="path-length mismatch"):
        self.node = node
        self.lengths = tuple(lengths)
        self.reason = reason
        super().__init__(f"network is not layered: node {node} ({reason}, lengths {self.lengths})")


def _check_pmf(probs, what):
    out = []
    arr = np.asarray(probs, dtype=float)
    if arr.size == 0:
        return [f"{what}: empty pmf"]
    if np.any(arr < 0):
        out.append(f"{what}: negative probability")
    if abs(arr.sum() - 1.0) > PMF_TOL:
        out.append(f"{what}: probabilities sum to {arr.sum():.12g}, not 1")
    return out


@dataclass(frozen=True)
class StateModel:
    """Law of the network state, i.i.d. over time.

    Either every edge carries an independent pmf (``pmfs[i]`` is the law of
    the state of ``edges[i]`` over ``0..len(pmfs[i])-1``), or ``joint`` lists
    explicit (assignment, probability) pairs over all edges at once.
    """

    edges: tuple[Edge, ...]
    pmfs: tuple[tuple[float, ...], ...] | None = None
    joint: tuple[tuple[tuple[int, ...], float], ...] | None = None

    @property
    def kind(self) -> str:
        return "iid" if self.joint is None else "joint"

    @classmethod
    def iid(cls, edge_pmfs: dict) -> "StateModel":
        edges = tuple(sorted(edge_pmfs))
        return cls(edges, tuple(tuple(float(p) for p in edge_pmfs[e]) for e in edges))

    @classmethod
    def from_joint(cls, edges, table) -> "StateModel":
        rows = tuple((tuple(int(v) for v in a), float(p)) for a, p in table)
        return cls(tuple(edges), None, rows)

    def alphabet_sizes(self) -> tuple[int, ...]:
        if self.joint is None:
            return tuple(len(p) for p in self.pmfs)
        if not self.joint:
            return tuple(1 for _ in self.edges)
        vals = np.array([a for a, _ in self.joint], dtype=np.int64).reshape(len(self.joint), len(self.edges))
        return tuple(int(v) + 1 for v in vals.max(axis=0)) if len(self.edges) else ()

    def diagnostics(self) -> list[str]:
        out = []
        if self.joint is None:
            if self.pmfs is None or len(self.pmfs) != len(self.edges):
                return ["state model: one pmf per edge required"]
            for e, p in zip(self.edges, self.pmfs):
                out += _check_pmf(p, f"state pmf of edge {e}")
        else:
            seen = set()
            for a, _ in self.joint:
                if len(a) != len(self.edges):
                    out.append(f"joint state assignment {a} does not cover all {len(self.edges)} edges")
                if a in seen:
                    out.append(f"joint state assignment {a} listed twice")
                seen.add(a)
                if any(v < 0 for v in a):
                    out.append(f"joint state assignment {a} has a negative entry")
            out += _check_pmf([p for _, p in self.joint], "joint state table")
        return out

    def marginal(self, idx) -> tuple[np.ndarray, np.ndarray]:
        """Support and probabilities of the states of ``edges[i] for i in idx``.

        Returns ``(values, probs)`` with ``values`` of shape (K, len(idx));
        only positive-probability assignments are listed.
        """
        idx = list(idx)
        if self.joint is None:
            supports = []
            for i in idx:
                p = np.asarray(self.pmfs[i])
                nz = np.nonzero(p > 0)[0]
                supports.append((nz, p[nz]))
            if not idx:
                return np.zeros((1, 0), dtype=np.int64), np.ones(1)
            grids = np.meshgrid(*[s for s, _ in supports], indexing="ij")
            pgrids = np.meshgrid(*[w for _, w in supports], indexing="ij")
            values = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
            probs = np.prod(np.stack([g.ravel() for g in pgrids], axis=1), axis=1)
            return values, probs
        rows = [(a, p) for a, p in self.joint if p > 0]
        full = np.array([a for a, _ in rows], dtype=np.int64).reshape(len(rows), len(self.edges))
        probs = np.array([p for _, p in rows])
        sub = full[:, idx]
        if not idx:
            return np.zeros((1, 0), dtype=np.int64), np.array([probs.sum()])
        uniq, inv = np.unique(sub, axis=0, return_inverse=True)
        return uniq.astype(np.int64), np.bincount(inv.ravel(), weights=probs, minlength=len(uniq))

    def support_size(self, idx) -> int:
        idx = list(idx)
        if self.joint is None:
            n = 1
            for i in idx:
                n *= int(np.count_nonzero(np.asarray(self.pmfs[i]) > 0))
            return n
        return len(self.marginal(idx)[1])

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw ``size`` i.i.d. full state assignments; shape ``size + (n_edges,)``."""
        shape = (size,) if np.ndim(size) == 0 else tuple(size)
        if self.joint is None:
            cols = [rng.choice(len(p), size=shape, p=np.asarray(p) / np.sum(p)) for p in self.pmfs]
            if not cols:
                return np.zeros(shape + (0,), dtype=np.int64)
            return np.stack(cols, axis=-1).astype(np.int64)
        vals = np.array([a for a, _ in self.joint], dtype=np.int64).reshape(len(self.joint), len(self.edges))
        probs = np.array([p for _, p in self.joint])
        pick = rng.choice(len(self.joint), size=shape, p=probs / probs.sum())
        return vals[pick]


@dataclass(frozen=True, eq=False)
class ChannelTable:
    """Deterministic channel of one node in general mode.

    ``lookup`` has shape ``in_sizes + state_sizes``; the axes follow the
    in-neighbours in ascending order, then the incoming edges' states in the
    same order.  Entries are outputs in ``[0, out_size)``; -1 marks a hole.
    """

    node: int
    in_sizes: tuple[int, ...]
    state_sizes: tuple[int, ...]
    out_size: int
    lookup: np.ndarray

    @classmethod
    def from_function(cls, node, in_sizes, state_sizes, out_size, fn) -> "ChannelTable":
        shape = tuple(in_sizes) + tuple(state_sizes)
        lookup = np.empty(shape, dtype=np.int64)
        k = len(in_sizes)
        for idx in product(*[range(s) for s in shape]):
            lookup[idx] = fn(idx[:k], idx[k:])
        return cls(node, tuple(in_sizes), tuple(state_sizes), int(out_size), lookup)

    def diagnostics(self) -> list[str]:
        out = []
        shape = self.in_sizes + self.state_sizes
        if self.lookup.shape != shape:
            return [f"table of node {self.node}: shape {self.lookup.shape} != {shape}"]
        if np.any(self.lookup < 0):
            missing = tuple(int(i) for i in np.argwhere(self.lookup < 0)[0])
            out.append(f"table of node {self.node}: no output for entry {missing}")
        if np.any(self.lookup >= self.out_size):
            out.append(f"table of node {self.node}: output outside alphabet of size {self.out_size}")
        return out

    def __call__(self, inputs, states):
        return self.lookup[tuple(inputs) + tuple(states)]

    def __eq__(self, other):
        if not isinstance(other, ChannelTable):
            return NotImplemented
        return (self.node, self.in_sizes, self.state_sizes, self.out_size) == (
            other.node, other.in_sizes, other.state_sizes, other.out_size
        ) and np.array_equal(self.lookup, other.lookup)


@dataclass(frozen=True)
class Layering:
    layer_of: dict
    layers: tuple[tuple[int, ...], ...]

    @property
    def L(self) -> int:
        return len(self.layers) - 1


@dataclass(frozen=True, eq=False)
class Network:
    """A relay network.  Construct, then call :func:`validate` (or ``check``)."""

    n_nodes: int
    edges: tuple[Edge, ...]
    destinations: tuple[int, ...]
    mode: str
    state_model: StateModel
    field: Field | None = None
    alphabets: dict | None = None  # general mode: node -> (input size, output size)
    tables: dict | None = None  # general mode: node -> ChannelTable
    source: int = 1

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(int(x) for x in e) for e in self.edges))
        object.__setattr__(self, "destinations", tuple(sorted(int(d) for d in self.destinations)))

    # topology ------------------------------------------------------------
    @property
    def nodes(self) -> range:
        return range(1, self.n_nodes + 1)

    @property
    def edge_index(self) -> dict:
        return {e: i for i, e in enumerate(self.edges)}

    def input_neighbors(self, v: int) -> tuple[int, ...]:
        if v not in self.nodes:
            raise KeyError(f"unknown node {v}")
        return tuple(sorted(u for u, w in self.edges if w == v))

    def output_neighbors(self, v: int) -> tuple[int, ...]:
        if v not in self.nodes:
            raise KeyError(f"unknown node {v}")
        return tuple(sorted(w for u, w in self.edges if u == v))

    def in_edge_indices(self, v: int) -> list[int]:
        idx = self.edge_index
        return [idx[(u, v)] for u in self.input_neighbors(v)]

    def transmitters(self) -> tuple[int, ...]:
        """Nodes whose input reaches somebody (others send a constant 0)."""
        return tuple(sorted({u for u, _ in self.edges}))

    def input_size(self, v: int) -> int:
        if self.mode == LINEAR:
            return self.field.q
        return self.alphabets[v][0]

    def output_size(self, v: int) -> int:
        if self.mode == LINEAR:
            return self.field.q
        return self.alphabets[v][1]

    def state_sizes(self) -> tuple[int, ...]:
        return self.state_model.alphabet_sizes()

    # channel ---------------------------------------------------------------
    def observe(self, v: int, x: dict, s: np.ndarray) -> np.ndarray:
        """Observation of node ``v``.

        ``x`` maps each in-neighbour to its input (scalar or array); ``s`` is a
        full state assignment whose last axis runs over ``edges``.
        """
        nbrs = self.input_neighbors(v)
        eidx = self.in_edge_indices(v)
        s = np.asarray(s, dtype=np.int64)
        if self.mode == LINEAR:
            f = self.field
            acc = np.zeros(np.broadcast_shapes(s.shape[:-1], *[np.shape(x[u]) for u in nbrs]), dtype=np.int64)
            for u, e in zip(nbrs, eidx):
                acc = f.add(acc, f.mul(s[..., e], x[u]))
            return acc
        table = self.tables.get(v) if self.tables else None
        if table is None:
            return np.zeros(s.shape[:-1], dtype=np.int64)
        return table([np.asarray(x[u]) for u in nbrs], [s[..., e] for e in eidx])

    def with_destinations(self, dests) -> "Network":
        return Network(self.n_nodes, self.edges, tuple(dests), self.mode, self.state_model,
                       self.field, self.alphabets, self.tables, self.source)

    def check(self) -> "Network":
        diags = validate(self)
        if diags:
            raise NetworkError(diags)
        return self

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and self.edges == other.edges
            and self.destinations == other.destinations
            and self.mode == other.mode
            and self.state_model == other.state_model
            and self.field == other.field
            and (self.alphabets or {}) == (other.alphabets or {})
            and (self.tables or {}) == (other.tables or {})
        )

    def __repr__(self):
        return (f"Network(n_nodes={self.n_nodes}, mode={self.mode!r}, edges={list(self.edges)}, "
                f"destinations={list(self.destinations)})")


def reachable_from(n_nodes: int, edges, source: int) -> set:
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    seen = {source}
    todo = deque([source])
    while todo:
        u = todo.popleft()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


def validate(net: Network) -> list[str]:
    """Return every violated invariant (an empty list means the network is valid)."""
    diags = []
    nodes = set(net.nodes)
    if net.n_nodes < 2:
        diags.append("network needs at least two nodes")
    if net.source != 1:
        diags.append("source must be node 1")
    if net.mode not in (LINEAR, GENERAL):
        diags.append(f"unknown mode {net.mode!r}")
    seen = set()
    for e in net.edges:
        u, v = e
        if u not in nodes or v not in nodes:
            diags.append(f"edge {e} references an unknown node")
        if u == v:
            diags.append(f"self-loop on node {u}")
        if e in seen:
            diags.append(f"duplicate edge {e}")
        seen.add(e)
    if list(net.edges) != sorted(net.edges):
        diags.append("edges must be listed in ascending (u, v) order")
    if not net.destinations:
        diags.append("destination set is empty")
    for d in net.destinations:
        if d not in nodes:
            diags.append(f"destination {d} is not a node")
        elif d == 1:
            diags.append("the source cannot be a destination")
    reach = reachable_from(net.n_nodes, net.edges, 1)
    for d in net.destinations:
        if d in nodes and d != 1 and d not in reach:
            diags.append(f"destination {d} is unreachable from the source")

    sm = net.state_model
    if sm.edges != net.edges:
        diags.append("state model edges do not match the network edges")
    else:
        diags += sm.diagnostics()
    if net.mode == LINEAR:
        if net.field is None:
            diags.append("linear mode requires a field")
        elif sm.edges == net.edges and any(s > net.field.q for s in sm.alphabet_sizes()):
            diags.append(f"edge state outside GF({net.field.q})")
    elif net.mode == GENERAL:
        alph = net.alphabets or {}
        for v in nodes:
            if v not in alph:
                diags.append(f"general mode: node {v} has no alphabet declaration")
            elif min(alph[v]) < 1:
                diags.append(f"general mode: node {v} has an empty alphabet")
        if not diags:
            ssz = sm.alphabet_sizes()
            for v in nodes:
                nbrs = net.input_neighbors(v)
                table = (net.tables or {}).get(v)
                if not nbrs:
                    continue
                if table is None:
                    diags.append(f"general mode: node {v} has in-neighbours but no channel table")
                    continue
                want_in = tuple(alph[u][0] for u in nbrs)
                want_s = tuple(ssz[i] for i in net.in_edge_indices(v))
                if table.in_sizes != want_in or table.state_sizes != want_s or table.out_size != alph[v][1]:
                    diags.append(f"table of node {v}: dimensions {table.in_sizes}/{table.state_sizes}/"
                                 f"{table.out_size} do not match {want_in}/{want_s}/{alph[v][1]}")
                    continue
                diags += table.diagnostics()
    return diags


def layers_of_graph(nodes, edges, source) -> Layering:
    """Layer every node of a directed graph by its (unique) hop distance from ``source``."""
    nodes = list(nodes)
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    dist = {source: 0}
    todo = deque([source])
    while todo:
        u = todo.popleft()
        for v in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                todo.append(v)
    for v in nodes:
        if v not in dist:
            raise NotLayered(v, (), reason="unreachable from the source")
    for u, v in sorted(edges, key=lambda e: (dist[e[0]], e)):
        if dist[v] != dist[u] + 1:
            raise NotLayered(v, sorted((dist[v], dist[u] + 1)))
    L = max(dist.values())
    layers = tuple(tuple(sorted((v for v in nodes if dist[v] == layer), key=_node_key)) for layer in range(L + 1))
    return Layering(dict(dist), layers)


def _node_key(v):
    return v if isinstance(v, tuple) else (v,)


def compute_layers(net: Network) -> Layering:
    """Layering of ``net``; raises :class:`NotLayered` with a witness when none exists."""
    return layers_of_graph(net.nodes, net.edges, 1)


def input_neighbors(net: Network, v: int) -> tuple[int, ...]:
    return net.input_neighbors(v)


def erasure_to_linear(n_nodes: int, erasure: dict, destinations, field: Field) -> Network:
    """Linear fading network whose coefficient on (u, v) is 0 w.p. erasure[(u, v)], else 1."""
    pmfs = {}
    for e, eps in erasure.items():
        if not 0.0 <= eps <= 1.0:
            raise NetworkError(f"erasure probability {eps} of edge {e} outside [0, 1]")
        pmfs[tuple(e)] = (float(eps), 1.0 - float(eps))
    sm = StateModel.iid(pmfs)
    return Network(n_nodes, sm.edges, tuple(destinations), LINEAR, sm, field=field)


def linear_network(n_nodes: int, edge_pmfs: dict, destinations, field: Field) -> Network:
    """Linear network with independent per-edge coefficient pmfs over GF(q)."""
    sm = StateModel.iid({tuple(e): p for e, p in edge_pmfs.items()})
    return Network(n_nodes, sm.edges, tuple(destinations), LINEAR, sm, field=field)
