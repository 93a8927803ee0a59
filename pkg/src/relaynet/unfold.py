"""Time-extended (unfolded) networks and the steady-cut sandwich checks.

Unfolding over T stages makes a copy v[t] of every node for t = 0..T.  Each
base edge (u, v) becomes u[t] -> v[t+1] with an independent copy of its
state.  Each node also has a memory link v[t] -> v[t+1] that reliably
carries ``w`` symbols of the node's observation alphabet.  Links along the
source chain and the destination chain have unbounded capacity, so a
finite-valued cut keeps every source copy inside and every destination copy
outside.

Memory links are our own construction.  Cut values are computed on the
full stage graph.  The layered view drops copies the source cannot reach;
in the stage graph those copies send independent symbols drawn from the
product input law, which is exactly the law the cut values assume.

With product inputs that repeat at every stage, a cut's entropy splits into
one term per stage:

    H(unfolded cut) = sum_t h(U_t, V - U_{t+1}) + sum of memory links leaving the cut

Here U_t is the set of base nodes whose stage-t copy is inside the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import CutEvaluator, input_vector
from .cuts import enumerate_cuts, format_nodes
from .network import Layering, Network, layers_of_graph, reachable_from

Copy = tuple[int, int]  # (base node, stage)


@dataclass(frozen=True)
class UnfoldedNetwork:
    base: Network
    T: int
    w: int
    copies: tuple[Copy, ...]
    cross_edges: tuple[tuple[Copy, Copy], ...]
    memory_edges: tuple[tuple[Copy, Copy], ...]
    trimmed: tuple[Copy, ...]

    @property
    def source(self) -> Copy:
        return (1, 0)

    def destination_copies(self) -> tuple[Copy, ...]:
        return tuple((d, self.T) for d in self.base.destinations)

    def edges(self) -> list[tuple[Copy, Copy]]:
        return sorted(set(self.cross_edges) | set(self.memory_edges))

    def layering(self) -> Layering:
        return layers_of_graph(self.copies, self.edges(), self.source)

    def memory_bits(self, v: int) -> float:
        """Capacity of v's memory link in bits (inf on the source and destination chains)."""
        if v == 1 or v in self.base.destinations:
            return math.inf
        return self.w * math.log2(self.base.output_size(v))


def default_memory_width(net: Network) -> int:
    """ceil(log_q |Y_v|) over the relays: one field symbol in linear mode."""
    if net.mode == "linear":
        return 1
    base = max(net.input_size(v) for v in net.nodes)
    return max(1, max(math.ceil(math.log(net.output_size(v), base)) if base > 1 else 1 for v in net.nodes))


def unfold(net: Network, T: int, w: int | None = None) -> UnfoldedNetwork:
    """Unfold ``net`` over ``T`` stages with relay memory width ``w``."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if w is None:
        w = default_memory_width(net)
    if w < 0:
        raise ValueError("memory width must be nonnegative")
    all_copies = [(v, t) for t in range(T + 1) for v in net.nodes]
    cross = [((u, t), (v, t + 1)) for t in range(T) for (u, v) in net.edges]
    chains = {1, *net.destinations}
    memory = [((v, t), (v, t + 1)) for t in range(T) for v in net.nodes if w > 0 or v in chains]
    fwd = reachable_from(None, cross + memory, (1, 0))
    keep = [c for c in all_copies if c in fwd]
    keep_set = set(keep)
    trimmed = tuple(c for c in all_copies if c not in keep_set)
    return UnfoldedNetwork(
        net, T, w, tuple(keep),
        tuple(e for e in cross if e[0] in keep_set and e[1] in keep_set),
        tuple(e for e in memory if e[0] in keep_set and e[1] in keep_set),
        trimmed,
    )


@dataclass(frozen=True)
class UnfoldedCut:
    """A cut of the stage graph given stage by stage: ``stages[t]`` = U_t."""

    destination: int
    stages: tuple[frozenset, ...]

    @property
    def steady(self) -> bool:
        return len(set(self.stages)) == 1

    @property
    def label(self) -> str:
        return "|".join(format_nodes(s) for s in self.stages)


class StageEntropy:
    """Cached per-stage terms for one base network and input law."""

    def __init__(self, unf: UnfoldedNetwork, dist=None):
        self.unf = unf
        self.px = input_vector(unf.base, dist)
        self._cache: dict = {}

    def term(self, A: frozenset, B: frozenset) -> float:
        key = (A, B)
        if key not in self._cache:
            self._cache[key] = CutEvaluator(self.unf.base, A, B).evaluate(self.px)
        return self._cache[key]

    def value(self, cut: UnfoldedCut) -> float:
        base = self.unf.base
        nodes = frozenset(base.nodes)
        total = 0.0
        for t in range(self.unf.T):
            Ut, Un = cut.stages[t], cut.stages[t + 1]
            total += self.term(Ut, nodes - Un)
            for v in Ut - Un:
                total += self.unf.memory_bits(v)
        return total


def steady_cuts(unf: UnfoldedNetwork, d: int) -> list[UnfoldedCut]:
    return [UnfoldedCut(d, (c.members,) * (unf.T + 1)) for c in enumerate_cuts(unf.base, d)]


def unfolded_cuts(unf: UnfoldedNetwork, d: int, budget: int, seed: int = 0) -> list[UnfoldedCut]:
    """Every steady cut plus either all cuts (if they fit in ``budget``) or ``budget`` random ones.

    Only cuts with finite value are produced: source copies in, copies of
    ``d`` out.
    """
    others = [v for v in unf.base.nodes if v not in (1, d)]
    nbits = len(others) * (unf.T + 1)
    out = {c.stages: c for c in steady_cuts(unf, d)}

    def build(bits):
        stages = []
        for t in range(unf.T + 1):
            chunk = bits[t * len(others):(t + 1) * len(others)]
            stages.append(frozenset({1} | {v for v, b in zip(others, chunk) if b}))
        return UnfoldedCut(d, tuple(stages))

    if nbits <= 62 and (1 << nbits) <= budget:
        for mask in range(1 << nbits):
            c = build([mask >> i & 1 for i in range(nbits)])
            out.setdefault(c.stages, c)
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed, d, unf.T]))
        for row in rng.integers(0, 2, size=(budget, nbits)):
            c = build(row.tolist())
            out.setdefault(c.stages, c)
    return list(out.values())


def base_min_cut(net: Network, d: int, dist=None) -> float:
    px = input_vector(net, dist)
    return min(CutEvaluator(net, c.members, c.complement(net)).evaluate(px) for c in enumerate_cuts(net, d))


@dataclass
class CutRecord:
    cut: UnfoldedCut
    value: float
    margin: float


@dataclass
class NormalizedRateReport:
    T: int
    w: int
    base_value: float
    steady_min: float
    unfolded_min: float
    normalized: float
    normalized_steady: float
    cuts_evaluated: int
    table: list[CutRecord] = field(default_factory=list)
    note: str = "memory links are a reconstruction: w symbols per stage for relays, unbounded for source/destination"


def verify_normalized_rate(net: Network, T: int, dist=None, budget: int = 4096, seed: int = 0,
                           w: int | None = None) -> NormalizedRateReport:
    """(1/T) min over unfolded cuts (all steady cuts plus a budgeted sample) of the cut entropy."""
    unf = unfold(net, T, w)
    se = StageEntropy(unf, dist)
    base_val, steady_min, unf_min = math.inf, math.inf, math.inf
    rows, n = [], 0
    for d in net.destinations:
        bmin = base_min_cut(net, d, dist)
        base_val = min(base_val, bmin)
        for c in unfolded_cuts(unf, d, budget, seed):
            v = se.value(c)
            n += 1
            rows.append(CutRecord(c, v, v - T * bmin))
            unf_min = min(unf_min, v)
            if c.steady:
                steady_min = min(steady_min, v)
    return NormalizedRateReport(T, unf.w, base_val, steady_min, unf_min, unf_min / T, steady_min / T, n, rows)


@dataclass
class SandwichReport:
    T: int
    N: int
    w: int
    lower_coefficient: int
    base_min: dict[int, float]
    unfolded_min: dict[int, float]
    lower_ok: bool
    upper_ok: bool
    lower_margin: float
    upper_margin: float
    violations: list[CutRecord]
    cuts_evaluated: int

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok


def verify_sandwich(net: Network, T: int, dist=None, budget: int = 4096, seed: int = 0,
                    w: int | None = None, lower_coefficient: int | None = None,
                    tol: float = 1e-9) -> SandwichReport:
    """Check both sides of the unfolding sandwich for one input law.

    lower: c * min_U H(U) <= H(cut) for every evaluated unfolded cut, with
           c = T - N + 1 and N = 2**(|V|-2) unless ``lower_coefficient`` is given;
    upper: min over evaluated unfolded cuts <= T * min_U H(U).
    """
    unf = unfold(net, T, w)
    se = StageEntropy(unf, dist)
    N = 1 << (net.n_nodes - 2)
    coef = T - N + 1 if lower_coefficient is None else lower_coefficient
    base_min, unf_min = {}, {}
    violations = []
    lower_margin, upper_margin = math.inf, math.inf
    n = 0
    for d in net.destinations:
        bmin = base_min_cut(net, d, dist)
        base_min[d] = bmin
        best = math.inf
        for c in unfolded_cuts(unf, d, budget, seed):
            v = se.value(c)
            n += 1
            best = min(best, v)
            m = v - coef * bmin
            lower_margin = min(lower_margin, m)
            if m < -tol:
                violations.append(CutRecord(c, v, m))
        unf_min[d] = best
        upper_margin = min(upper_margin, T * bmin - best)
    return SandwichReport(T, N, unf.w, coef, base_min, unf_min, not violations, upper_margin >= -tol,
                          lower_margin, upper_margin, violations, n)
