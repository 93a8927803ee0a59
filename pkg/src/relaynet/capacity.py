"""Min-cut capacity of linear fading networks and cut-set style bounds.

Three quantities are computed here:

* ``linear_capacity`` -- min over destinations and cuts of the expected
  transfer-matrix rank times log2 q (exact enumeration or Monte Carlo);
* ``achievable_rate`` -- the max-min cut entropy over *product* input
  distributions, searched on a simplex grid;
* ``cutset_bound`` -- the same objective maximised over *joint* input
  distributions.

Every entropy is H(Y_B | X_{not A}, S) for a sender set A and receiver set
B; a cut U is the case A = U, B = complement of U.  Only observations of
receivers with an incoming edge from A matter, and only the states of
edges entering those receivers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .cuts import Cut, TransferMatrixView, enumerate_cuts
from .field import batch_rank
from .info import MAX_JOINT_CELLS, JointTooLarge
from .network import LINEAR, Network, NetworkError

MAX_EXACT_SUPPORT = 1 << 20
MC_CHUNK = 4096
Z95 = 1.959963984540054
MAX_GRID_POINTS = 2_000_000
TIE_TOL = 1e-12


class CapError(RuntimeError):
    """A computation would exceed one of the enumeration caps."""


# ---------------------------------------------------------------------------
# input distributions


def transmitters(net: Network) -> tuple[int, ...]:
    return net.transmitters()


def uniform_product(net: Network) -> dict[int, np.ndarray]:
    return {u: np.full(net.input_size(u), 1.0 / net.input_size(u)) for u in net.transmitters()}


def product_vector(net: Network, pmfs: dict) -> np.ndarray:
    """Flatten a per-node product distribution over the transmitters' joint alphabet."""
    vec = np.ones(1)
    for u in net.transmitters():
        p = np.asarray(pmfs[u], dtype=float)
        if p.shape != (net.input_size(u),):
            raise ValueError(f"pmf of node {u} must have {net.input_size(u)} entries")
        vec = np.multiply.outer(vec, p).ravel()
    return vec


def input_vector(net: Network, dist) -> np.ndarray:
    """Accept a per-node dict (product law) or a joint array over the transmitters."""
    if dist is None:
        return product_vector(net, uniform_product(net))
    if isinstance(dist, dict):
        return product_vector(net, dist)
    vec = np.asarray(dist, dtype=float).ravel()
    n = int(np.prod([net.input_size(u) for u in net.transmitters()], dtype=np.int64))
    if vec.size != n:
        raise ValueError(f"joint input distribution needs {n} cells, got {vec.size}")
    return vec


# ---------------------------------------------------------------------------
# cut entropies


def _batch_entropy(mass: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mass > 0, mass * np.log2(np.where(mass > 0, mass, 1.0)), 0.0)
    return -terms.sum(axis=-1)


class CutEvaluator:
    """Evaluates H(Y_B | X_{not A}, S) for any input law on the transmitters.

    The joint space (transmitter inputs) x (relevant state support) is
    enumerated once; afterwards each evaluation is two grouped sums.
    """

    def __init__(self, net: Network, senders, receivers, max_cells: int = MAX_JOINT_CELLS):
        self.net = net
        A = frozenset(senders)
        self.A = A
        self.targets = tuple(sorted(v for v in set(receivers) if any(u in A for u in net.input_neighbors(v))))
        tx = net.transmitters()
        sizes = [net.input_size(u) for u in tx]
        n_x = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
        rel = sorted({i for v in self.targets for i in net.in_edge_indices(v)})
        if not self.targets:
            self.n_x = n_x
            self.trivial = True
            return
        self.trivial = False
        n_s = net.state_model.support_size(rel)
        if n_x * n_s > max_cells:
            raise JointTooLarge(f"cut joint has {n_x}*{n_s} cells, over the cap of {max_cells}")
        s_vals, self.ps = net.state_model.marginal(rel)
        s_full = np.zeros((len(self.ps), len(net.edges)), dtype=np.int64)
        s_full[:, rel] = s_vals
        grids = np.indices(sizes).reshape(len(sizes), -1) if sizes else np.zeros((0, 1), dtype=np.int64)
        xs = {u: grids[i][:, None] for i, u in enumerate(tx)}
        ys = [np.broadcast_to(net.observe(v, xs, s_full[None, :, :]), (n_x, len(self.ps))).ravel()
              for v in self.targets]
        given_x = [i for i, u in enumerate(tx) if u not in A]
        if given_x:
            xc = np.ravel_multi_index(tuple(grids[i] for i in given_x), tuple(sizes[i] for i in given_x))
        else:
            xc = np.zeros(n_x, dtype=np.int64)
        xc = np.repeat(xc, len(self.ps))
        sc = np.tile(np.arange(len(self.ps)), n_x)
        cond = xc * len(self.ps) + sc
        _, self.cond_ids = np.unique(cond, return_inverse=True)
        _, self.joint_ids = np.unique(np.stack(ys + [cond], axis=1), axis=0, return_inverse=True)
        self.joint_ids = self.joint_ids.ravel()
        self.cond_ids = self.cond_ids.ravel()
        self.n_x = n_x
        self._prep = [self._sorter(self.joint_ids), self._sorter(self.cond_ids)]

    @staticmethod
    def _sorter(ids):
        order = np.argsort(ids, kind="stable")
        sorted_ids = ids[order]
        starts = np.flatnonzero(np.r_[True, sorted_ids[1:] != sorted_ids[:-1]])
        return order, starts

    def evaluate(self, px: np.ndarray) -> float:
        return float(self.evaluate_batch(np.asarray(px, dtype=float)[None, :])[0])

    def evaluate_batch(self, PX: np.ndarray) -> np.ndarray:
        """Entropies for a stack of input laws, shape (P, n_x)."""
        PX = np.atleast_2d(PX)
        if self.trivial:
            return np.zeros(PX.shape[0])
        out = np.empty(PX.shape[0])
        step = max(1, (1 << 22) // (self.n_x * len(self.ps)))
        for lo in range(0, PX.shape[0], step):
            W = (PX[lo:lo + step, :, None] * self.ps[None, None, :]).reshape(-1, self.n_x * len(self.ps))
            h = []
            for order, starts in self._prep:
                h.append(_batch_entropy(np.add.reduceat(W[:, order], starts, axis=1)))
            out[lo:lo + step] = h[0] - h[1]
        return out


def cut_conditional_entropy(net: Network, cut: Cut, input_dist=None) -> float:
    """H(Y_{boundary of U^c} | X_{U^c}, S) in bits under ``input_dist`` (uniform product if None)."""
    ev = CutEvaluator(net, cut.members, cut.complement(net))
    return ev.evaluate(input_vector(net, input_dist))


def pair_conditional_entropy(net: Network, senders, receivers, input_dist=None) -> float:
    """H(Y_receivers | X_{not senders}, S); reduces to the cut entropy when receivers = complement."""
    ev = CutEvaluator(net, senders, receivers)
    return ev.evaluate(input_vector(net, input_dist))


# ---------------------------------------------------------------------------
# expected rank and the linear-network capacity


@dataclass(frozen=True)
class RankEstimate:
    value: float
    half_width: float = 0.0
    method: str = "exact"
    samples: int = 0
    seed: int | None = None


def cut_id(net: Network, cut: Cut) -> int:
    mask = sum(1 << (v - 1) for v in cut.members)
    return cut.destination * (1 << net.n_nodes) + mask


def _mc_chunk_ranks(view: TransferMatrixView, seed: int, cid: int, chunk: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, cid, chunk]))
    states = view.net.state_model.sample(rng, size)
    return batch_rank(view.net.field, view.assemble_batch(states))


def expected_rank(net: Network, cut: Cut, method: str = "exact", samples: int = 10_000,
                  seed: int = 0, workers: int = 1) -> RankEstimate:
    """E[rank G_U] over the state law.

    ``exact`` enumerates the support of the crossing-edge states.  ``montecarlo``
    averages ``samples`` draws; draw i belongs to chunk i // MC_CHUNK, whose
    generator is seeded from (seed, cut id, chunk index), so the estimate does
    not depend on ``workers``.
    """
    if net.mode != LINEAR:
        raise NetworkError("expected_rank needs a linear network")
    view = TransferMatrixView(net, cut)
    cross = [e for e, _, _ in view.crossing()]
    if method == "exact":
        n_support = net.state_model.support_size(cross)
        if n_support > MAX_EXACT_SUPPORT:
            raise CapError(f"crossing-state support {n_support} exceeds {MAX_EXACT_SUPPORT}; use Monte Carlo")
        vals, probs = net.state_model.marginal(cross)
        full = np.zeros((len(probs), len(net.edges)), dtype=np.int64)
        full[:, cross] = vals
        ranks = batch_rank(net.field, view.assemble_batch(full))
        return RankEstimate(float(np.dot(probs, ranks)), 0.0, "exact")
    if method != "montecarlo":
        raise ValueError(f"unknown method {method!r}")
    if samples < 1:
        raise ValueError("Monte Carlo needs at least one sample")
    cid = cut_id(net, cut)
    sizes = [min(MC_CHUNK, samples - lo) for lo in range(0, samples, MC_CHUNK)]
    jobs = [(view, seed, cid, i, s) for i, s in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _mc_chunk_ranks(*a), jobs))
    else:
        parts = [_mc_chunk_ranks(*a) for a in jobs]
    ranks = np.concatenate(parts).astype(float)
    mean = float(ranks.mean())
    hw = Z95 * float(ranks.std(ddof=1)) / math.sqrt(samples) if samples > 1 else float("inf")
    return RankEstimate(mean, hw, "montecarlo", samples, seed)


@dataclass
class CutRow:
    destination: int
    cut: Cut
    expected_rank: float
    half_width: float
    bits: float


@dataclass
class CapacityReport:
    """Result of a min-cut computation.

    ``argmin`` lists, per destination, every cut attaining that destination's
    minimum (within the Monte Carlo half-widths when sampling).
    """

    value: float
    per_destination: dict[int, float]
    argmin: dict[int, list[Cut]]
    method: str
    samples: int = 0
    seed: int | None = None
    half_width: float = 0.0
    table: list[CutRow] = field(default_factory=list)

    @property
    def mincut(self) -> Cut:
        d = min(self.per_destination, key=lambda k: (self.per_destination[k], k))
        return self.argmin[d][0]


def _rank_jobs(net, method, samples, seed, workers):
    cache = {}
    rows = []
    for d in net.destinations:
        for cut in enumerate_cuts(net, d):
            key = cut.members
            if key not in cache:
                cache[key] = expected_rank(net, cut, method, samples, seed, workers)
            est = cache[key]
            scale = math.log2(net.field.q)
            rows.append(CutRow(d, cut, est.value, est.half_width, est.value * scale))
    return rows


def linear_capacity(net: Network, method: str = "exact", samples: int = 10_000, seed: int = 0,
                    workers: int = 1) -> CapacityReport:
    """min_d min_U E[rank G_U] log2 q, with the attaining cuts as certificate."""
    if net.mode != LINEAR:
        raise NetworkError("linear_capacity needs a linear network")
    rows = _rank_jobs(net, method, samples, seed, workers)
    scale = math.log2(net.field.q)
    per_dest, argmin = {}, {}
    hw_at = {}
    for d in net.destinations:
        drows = [r for r in rows if r.destination == d]
        best = min(drows, key=lambda r: r.bits)
        per_dest[d] = best.bits
        hw_at[d] = best.half_width * scale
        if method == "exact":
            argmin[d] = [r.cut for r in drows if r.bits <= best.bits + TIE_TOL]
        else:
            argmin[d] = [r.cut for r in drows
                         if r.bits - best.bits <= (r.half_width + best.half_width) * scale]
    value = min(per_dest.values())
    d_star = min(per_dest, key=lambda k: (per_dest[k], k))
    return CapacityReport(value, per_dest, argmin, method, samples if method != "exact" else 0,
                          seed if method != "exact" else None, hw_at[d_star], rows)


# ---------------------------------------------------------------------------
# grid searches over input distributions


def simplex_grid(k: int, c: int) -> np.ndarray:
    """All pmfs on ``c`` symbols whose entries are multiples of 1/k (stars and bars)."""
    if k < 1:
        raise ValueError("grid resolution k must be >= 1")
    n_points = math.comb(k + c - 1, c - 1)
    if n_points > MAX_GRID_POINTS:
        raise CapError(f"simplex grid with k={k} over {c} symbols has {n_points} points")
    pts = np.empty((n_points, c))
    for i, bars in enumerate(combinations(range(k + c - 1), c - 1)):
        edges = (-1,) + bars + (k + c - 1,)
        pts[i] = [edges[j + 1] - edges[j] - 1 for j in range(c)]
    return pts / k


def _evaluators(net: Network) -> list[CutEvaluator]:
    seen = {}
    for d in net.destinations:
        for cut in enumerate_cuts(net, d):
            if cut.members not in seen:
                seen[cut.members] = CutEvaluator(net, cut.members, cut.complement(net))
    return list(seen.values())


def _objective(evals, PX) -> np.ndarray:
    out = np.full(np.atleast_2d(PX).shape[0], np.inf)
    for ev in evals:
        out = np.minimum(out, ev.evaluate_batch(PX))
    return out


@dataclass
class RateResult:
    """Best grid value and a witness input law (per-node dict or joint array)."""

    value: float
    distribution: object
    k: int
    evaluations: int
    caveat: str = "grid search: the true optimum may exceed the value by the grid resolution gap"


def _product_stack(net, choice_lists):
    """Vectors for every combination of per-node candidate pmfs."""
    tx = net.transmitters()
    vecs = np.ones((1, 1))
    for u in tx:
        cands = choice_lists[u]
        vecs = (vecs[:, None, :, None] * cands[None, :, None, :]).reshape(vecs.shape[0] * len(cands), -1)
    return vecs


def _search_product(net: Network, evals, k: int):
    """Best point of the product k-grid: (value, per-node pmfs, number of points)."""
    tx = net.transmitters()
    grids = {u: simplex_grid(k, net.input_size(u)) for u in tx}
    idx_shape = [len(grids[u]) for u in tx]
    total = int(np.prod(idx_shape, dtype=np.int64))
    if total > MAX_GRID_POINTS:
        raise CapError(f"product grid has {total} points")
    best_val, best_flat = -np.inf, 0
    for lo in range(0, total, 4096):
        flat = np.arange(lo, min(total, lo + 4096))
        multi = np.unravel_index(flat, idx_shape) if tx else ()
        PX = np.ones((len(flat), 1))
        for i, u in enumerate(tx):
            PX = (PX[:, :, None] * grids[u][multi[i]][:, None, :]).reshape(len(flat), -1)
        vals = _objective(evals, PX)
        j = int(np.argmax(vals))
        if vals[j] > best_val + TIE_TOL:
            best_val, best_flat = float(vals[j]), int(flat[j])
    multi = np.unravel_index(best_flat, idx_shape) if tx else ()
    return best_val, {u: grids[u][multi[i]].copy() for i, u in enumerate(tx)}, total


def achievable_rate(net: Network, k: int = 4, refine_rounds: int = 0) -> RateResult:
    """max over product input laws (k-grid) of min_d min_U H(Y_{U^c} | X_{U^c}, S).

    ``refine_rounds`` > 0 runs coordinate ascent on successively doubled
    grids, one node at a time; a move is taken only if it strictly improves
    the objective.
    """
    if k < 1:
        raise ValueError("grid resolution k must be >= 1")
    evals = _evaluators(net)
    tx = net.transmitters()
    best_val, dist, n_eval = _search_product(net, evals, k)
    for r in range(1, refine_rounds + 1):
        kr = k << r
        for u in tx:
            cands = simplex_grid(kr, net.input_size(u))
            trial = {w: dist[w][None, :] for w in tx}
            trial[u] = cands
            vals = _objective(evals, _product_stack(net, trial))
            n_eval += len(cands)
            j = int(np.argmax(vals))
            if vals[j] > best_val + TIE_TOL:
                best_val, dist[u] = float(vals[j]), cands[j].copy()
    return RateResult(best_val, dist, k, n_eval)


def cutset_bound(net: Network, k: int = 4) -> RateResult:
    """max over joint input laws of the min-cut entropy.

    Candidates are the k-grid on the joint simplex plus every point of the
    product k-grid, so the value is never below ``achievable_rate(net, k)``.
    """
    evals = _evaluators(net)
    shape = tuple(net.input_size(u) for u in net.transmitters())
    n_x = int(np.prod(shape, dtype=np.int64))
    pts = simplex_grid(k, n_x)
    best_val, prod_dist, n_prod = _search_product(net, evals, k)
    best = product_vector(net, prod_dist)
    for lo in range(0, len(pts), 4096):
        vals = _objective(evals, pts[lo:lo + 4096])
        j = int(np.argmax(vals))
        if vals[j] > best_val + TIE_TOL:
            best_val, best = float(vals[j]), pts[lo + j].copy()
    return RateResult(best_val, best.reshape(shape), k, len(pts) + n_prod)


def min_cut_entropy(net: Network, input_dist=None) -> tuple[float, dict[int, list[Cut]]]:
    """min over destinations and cuts of the cut entropy at a fixed input law, with minimisers."""
    px = input_vector(net, input_dist)
    best, arg = math.inf, {}
    for d in net.destinations:
        vals = [(CutEvaluator(net, c.members, c.complement(net)).evaluate(px), c)
                for c in enumerate_cuts(net, d)]
        m = min(v for v, _ in vals)
        arg[d] = [c for v, c in vals if v <= m + 1e-12]
        best = min(best, m)
    return best, arg

