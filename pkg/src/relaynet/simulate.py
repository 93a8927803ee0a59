"""Monte Carlo simulation of block-Markov relaying over layered networks.

Message m_j leaves the source in block j.  A node in layer l forwards, in
block j + l, its mapped version of what it observed in block j + l - 1, so
the hop from layer l to layer l + 1 for m_j happens in block j + l and sees
that block's state.  Every edge's state is redrawn per symbol and per
block.  In a layered network each block's edges between layers l and l + 1
carry only one message, so message flows never mix.

Two decoders are provided:

* ``exact``: linear networks with random linear relays.  The destination
  recomputes the image of every candidate codeword and requires a unique
  match.
* ``typicality``: general networks with random-table relays.  A candidate
  must pass a robust joint-typicality check at every layer; the destination
  uses its actual observation at the last hop.

Ambiguity or an empty candidate list is always an error.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .capacity import CapError
from .field import FFMatrix, mat_rank
from .info import MAX_JOINT_CELLS, typical_batch
from .network import GENERAL, LINEAR, Network, NotLayered, compute_layers

EXACT = "exact"
TYPICALITY = "typicality"
MAX_CODEBOOK_CELLS = 1 << 21
Z95 = 1.959963984540054


# ---------------------------------------------------------------------------
# configuration and schedule


@dataclass(frozen=True)
class SimConfig:
    n: int
    R: float
    trials: int = 100
    seed: int = 0
    K: int = 1
    decoder: str = EXACT
    eps: float = 0.2
    chained: bool = False
    workers: int = 1
    input_pmfs: dict | None = None  # general mode: node -> pmf over its input alphabet
    codebook: str = "auto"  # auto | materialize | implicit
    max_cells: int = MAX_CODEBOOK_CELLS

    def __post_init__(self):
        if self.n < 1 or self.trials < 1 or self.K < 1:
            raise ValueError("n, trials and K must be positive")
        if self.R < 0:
            raise ValueError("rate must be nonnegative")
        if self.decoder not in (EXACT, TYPICALITY):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.codebook not in ("auto", "materialize", "implicit"):
            raise ValueError(f"unknown codebook mode {self.codebook!r}")

    @property
    def M(self) -> int:
        return max(1, int(round(2.0 ** (self.n * self.R))))


@dataclass(frozen=True)
class Schedule:
    """Which message each layer carries in each transmission block (1-based)."""

    K: int
    L: int

    @property
    def blocks(self) -> int:
        return self.K + self.L - 1

    def message(self, block: int, layer: int) -> int | None:
        """Index of the message layer ``layer`` transmits in ``block``, or None."""
        j = block - layer
        return j if 1 <= j <= self.K else None

    def state_block(self, j: int, layer: int) -> int:
        """Block whose state governs the hop of m_j out of ``layer``."""
        return j + layer

    def rows(self) -> list[list[int | None]]:
        return [[self.message(b, l) for l in range(self.L)] for b in range(1, self.blocks + 1)]


def effective_rate(R: float, K: int, L: int) -> float:
    return R * K / (K + L - 1)


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


# ---------------------------------------------------------------------------
# codebooks and relay maps


def _draw(rng: np.random.Generator, pmf: np.ndarray, size) -> np.ndarray:
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(size), side="right").astype(np.int64)


class LinearRelay:
    """x^n = A y^n over GF(q) with A drawn uniformly."""

    def __init__(self, net: Network, rng: np.random.Generator, n: int):
        self.field = net.field
        self.A = rng.integers(0, self.field.q, size=(n, n), dtype=np.int64)

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        # rows are sequences, so x = y A^T row-wise
        return self.field.matmul(Y, self.A.T)


class TableRelay:
    """Random map from observed sequences to input sequences, drawn on first use."""

    def __init__(self, rng: np.random.Generator, pmf: np.ndarray, n: int):
        self.rng = rng
        self.pmf = np.asarray(pmf, dtype=float)
        self.n = n
        self.table: dict[bytes, np.ndarray] = {}

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        out = np.empty(Y.shape, dtype=np.int64)
        for i, row in enumerate(Y):
            key = row.astype(np.int64).tobytes()
            x = self.table.get(key)
            if x is None:
                x = _draw(self.rng, self.pmf, self.n)
                self.table[key] = x
            out[i] = x
        return out


@dataclass
class Codebooks:
    source: np.ndarray | None  # (M, n), or None when the codebook is implicit
    relays: dict
    M: int
    n: int


def input_pmfs(net: Network, cfg: SimConfig) -> dict:
    given = cfg.input_pmfs or {}
    out = {}
    for u in net.transmitters():
        k = net.input_size(u)
        p = np.asarray(given.get(u, np.full(k, 1.0 / k)), dtype=float)
        if p.shape != (k,) or abs(p.sum() - 1) > 1e-9 or np.any(p < 0):
            raise ValueError(f"input pmf of node {u} must be a pmf over {k} symbols")
        out[u] = p
    return out


def _is_uniform(p: np.ndarray) -> bool:
    return bool(np.allclose(p, 1.0 / p.size))


def _implicit(net: Network, cfg: SimConfig) -> bool:
    if cfg.codebook == "implicit":
        return True
    if cfg.codebook == "materialize":
        return False
    return (cfg.decoder == EXACT and cfg.M * cfg.n > cfg.max_cells
            and _is_uniform(input_pmfs(net, cfg)[1]))


def trial_streams(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, trial])


def generate_codebooks(net: Network, cfg: SimConfig, trial_seed: np.random.SeedSequence,
                       materialize: bool = True) -> Codebooks:
    """Source codebook plus one random relay map per relay.

    The source codebook uses the first child stream of ``trial_seed``; node
    v's relay map uses child stream v.
    """
    M, n = cfg.M, cfg.n
    if materialize and M * n > cfg.max_cells:
        raise CapError(f"codebook of {M} x {n} symbols exceeds the budget of {cfg.max_cells}")
    pmfs = input_pmfs(net, cfg)
    children = trial_seed.spawn(net.n_nodes + 2)
    src = _draw(np.random.default_rng(children[0]), pmfs[1], (M, n)) if materialize else None
    relays = {}
    for v in net.transmitters():
        if v == 1:
            continue
        rng = np.random.default_rng(children[v])
        relays[v] = LinearRelay(net, rng, n) if net.mode == LINEAR else TableRelay(rng, pmfs[v], n)
    return Codebooks(src, relays, M, n)


# ---------------------------------------------------------------------------
# propagation


def propagate(net: Network, layering, books: Codebooks, X1: np.ndarray, states: list[np.ndarray]):
    """Push source rows through the network for one message.

    ``states[l]`` is the (n, |E|) state block governing the hop out of layer
    l.  Returns per-node observations and inputs, each of shape (C, n).
    """
    X = {1: X1}
    Y = {}
    for l in range(layering.L):
        s = states[l]
        for v in layering.layers[l + 1]:
            nb = net.input_neighbors(v)
            Y[v] = np.broadcast_to(net.observe(v, {u: X[u] for u in nb}, s), X1.shape).astype(np.int64)
            if v in books.relays:
                X[v] = books.relays[v](Y[v])
    return X, Y


# ---------------------------------------------------------------------------
# decoders


@dataclass
class Decision:
    message: int | None
    candidates: int

    @property
    def ambiguous(self) -> bool:
        return self.candidates > 1


def decode_exact_linear(received: np.ndarray, images: np.ndarray) -> Decision:
    """Unique candidate whose destination image equals ``received``."""
    hits = np.flatnonzero(np.all(images == received[None, :], axis=1))
    return Decision(int(hits[0]) if len(hits) == 1 else None, len(hits))


def layer_joint(net: Network, xs, edges, ys, pmfs: dict) -> tuple[np.ndarray, tuple[int, ...]]:
    """Joint pmf of (inputs of ``xs``, states of ``edges``, observations of ``ys``), flattened.

    Returns the flat pmf and the axis sizes, in that variable order.
    """
    eidx = [net.edge_index[e] for e in edges]
    x_sizes = [net.input_size(u) for u in xs]
    s_sizes = [net.state_sizes()[i] for i in eidx]
    y_sizes = [net.output_size(v) for v in ys]
    sizes = tuple(x_sizes + s_sizes + y_sizes)
    cells = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
    if cells > MAX_JOINT_CELLS:
        raise CapError(f"layer joint has {cells} cells, over the cap of {MAX_JOINT_CELLS}")
    s_vals, s_probs = net.state_model.marginal(eidx)
    grid = np.indices(x_sizes).reshape(len(x_sizes), -1) if x_sizes else np.zeros((0, 1), dtype=np.int64)
    px = np.ones(grid.shape[1])
    for i, u in enumerate(xs):
        px = px * pmfs[u][grid[i]]
    full = np.zeros((len(s_probs), len(net.edges)), dtype=np.int64)
    full[:, eidx] = s_vals
    xd = {u: grid[i][:, None] for i, u in enumerate(xs)}
    cols = [np.broadcast_to(grid[i][:, None], (grid.shape[1], len(s_probs))) for i in range(len(xs))]
    cols += [np.broadcast_to(s_vals[:, k][None, :], (grid.shape[1], len(s_probs))) for k in range(len(eidx))]
    for v in ys:
        nb = net.input_neighbors(v)
        missing = [u for u in nb if u not in xd]
        obs_x = dict(xd)
        for u in missing:  # in-neighbours outside the tested layer send a constant 0
            obs_x[u] = np.zeros((1, 1), dtype=np.int64)
        cols.append(np.broadcast_to(net.observe(v, obs_x, full[None, :, :]), (grid.shape[1], len(s_probs))))
    w = px[:, None] * s_probs[None, :]
    idx = np.ravel_multi_index(tuple(c.ravel() for c in cols), sizes) if sizes else np.zeros(w.size, dtype=np.int64)
    pmf = np.bincount(idx.ravel(), weights=w.ravel(), minlength=cells)
    return pmf, sizes


def decode_typicality(tests: list, eps: float) -> Decision:
    """Unique candidate passing every layer test.

    Each test is ``(pmf, sizes, columns)`` where ``columns`` are (C, n) or
    (n,) arrays in the variable order of the pmf.
    """
    ok = None
    for pmf, sizes, cols in tests:
        C = max(np.shape(c)[0] for c in cols if np.ndim(c) == 2)
        n = np.shape(cols[0])[-1]
        full = [np.broadcast_to(c, (C, n)) for c in cols]
        idx = np.ravel_multi_index(tuple(full), sizes)
        passed = typical_batch(pmf, idx, eps)
        ok = passed if ok is None else ok & passed
    hits = np.flatnonzero(ok)
    return Decision(int(hits[0]) if len(hits) == 1 else None, len(hits))


# ---------------------------------------------------------------------------
# one trial


@dataclass
class TrialResult:
    error: bool
    block_errors: int
    ambiguous: int
    empty: int
    candidates: int


def _kernel_union_prob(net: Network, bases: list[np.ndarray]) -> float:
    """P(uniform difference vector is invisible at some destination), by inclusion-exclusion."""
    f = net.field
    n = bases[0].shape[0]
    total = 0.0
    D = len(bases)
    for mask in range(1, 1 << D):
        chosen = [bases[i] for i in range(D) if mask >> i & 1]
        r = mat_rank(FFMatrix(f, np.concatenate(chosen, axis=1)))
        total += (-1) ** (len(chosen) + 1) * float(f.q) ** (-r)
    return min(1.0, max(0.0, total)) if n else 1.0


def run_trial(net: Network, layering, cfg: SimConfig, trial: int) -> TrialResult:
    ss = trial_streams(cfg.seed, trial)
    book_ss, msg_ss, state_ss, decide_ss = ss.spawn(4)
    implicit = _implicit(net, cfg)
    books = generate_codebooks(net, cfg, book_ss, materialize=not implicit)
    sched = Schedule(cfg.K, layering.L)
    state_rng = np.random.default_rng(state_ss)
    S = [net.state_model.sample(state_rng, cfg.n) for _ in range(sched.blocks)]
    msgs = np.random.default_rng(msg_ss).integers(0, books.M, size=cfg.K)
    decide_rng = np.random.default_rng(decide_ss)
    pmfs = input_pmfs(net, cfg)
    dest_layer = {d: layering.layer_of[d] for d in net.destinations}

    block_err = ambiguous = empty = cands = 0
    failed_before = False
    for j in range(1, cfg.K + 1):
        states = [S[sched.state_block(j, l) - 1] for l in range(layering.L)]
        wrong = False
        if implicit:
            # images of the basis vectors give the end-to-end map at each destination
            eye = np.eye(cfg.n, dtype=np.int64)
            _, Y = propagate(net, layering, books, eye, states)
            p = _kernel_union_prob(net, [Y[d] for d in net.destinations])
            clashes = int(decide_rng.binomial(books.M - 1, p)) if books.M > 1 else 0
            wrong = clashes > 0
            ambiguous += wrong
            cands += clashes + 1
        else:
            X, Y = propagate(net, layering, books, books.source, states)
            m = int(msgs[j - 1])
            for d in net.destinations:
                received = Y[d][m]
                if cfg.decoder == EXACT:
                    dec = decode_exact_linear(received, Y[d])
                else:
                    tests = []
                    ld = dest_layer[d]
                    for l in range(ld):
                        xs = [u for u in layering.layers[l] if u in pmfs]
                        ys = [d] if l == ld - 1 else list(layering.layers[l + 1])
                        edges = [e for e in net.edges if e[0] in xs and e[1] in ys]
                        pmf, sizes = layer_joint(net, xs, edges, ys, pmfs)
                        s = states[l]
                        cols = [X[u] for u in xs]
                        cols += [s[:, net.edge_index[e]] for e in edges]
                        cols += [received if v == d and l == ld - 1 else Y[v] for v in ys]
                        tests.append((pmf, sizes, cols))
                    dec = decode_typicality(tests, cfg.eps)
                cands += dec.candidates
                ambiguous += dec.ambiguous
                empty += dec.candidates == 0
                if dec.message != m:
                    wrong = True
        if cfg.chained and failed_before:
            wrong = True
        failed_before |= wrong
        block_err += wrong
    return TrialResult(block_err > 0, block_err, ambiguous, empty, cands)


# ---------------------------------------------------------------------------
# reports


@dataclass
class SimReport:
    n: int
    R: float
    M: int
    K: int
    L: int
    trials: int
    errors: int
    block_errors: int
    seed: int
    decoder: str
    codebook: str
    ambiguous: int = 0
    empty: int = 0
    mean_candidates: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)

    @property
    def effective_rate(self) -> float:
        return effective_rate(self.R, self.K, self.L)

    def row(self) -> str:
        lo, hi = self.ci
        return (f"sim n={self.n} R={self.R:.9g} M={self.M} err={self.error_rate:.9g} "
                f"ci={lo:.9g},{hi:.9g} seed={self.seed}")


def check_simulable(net: Network, cfg: SimConfig):
    try:
        layering = compute_layers(net)
    except NotLayered as exc:
        raise NotLayered(exc.node, exc.lengths, reason=f"{exc.reason}; unfold the network first") from None
    if cfg.decoder == EXACT and net.mode != LINEAR:
        raise ValueError("the exact decoder needs a linear network")
    if cfg.decoder == TYPICALITY and net.mode != GENERAL:
        raise ValueError("the typicality decoder needs a general-mode network")
    return layering


def run_blocks(net: Network, cfg: SimConfig) -> SimReport:
    """Simulate ``cfg.trials`` independent codebook/state draws and count errors."""
    layering = check_simulable(net, cfg)
    implicit = _implicit(net, cfg)

    def one(t):
        return run_trial(net, layering, cfg, t)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(one, range(cfg.trials)))
    else:
        results = [one(t) for t in range(cfg.trials)]
    notes = []
    if net.mode == LINEAR:
        notes.append("relays apply random linear maps; relay inputs are uniform only marginally")
    if implicit:
        notes.append("implicit codebook: clashes drawn as Binomial(M-1, q^-rank) from the end-to-end map")
    decodes = cfg.K * len(net.destinations) * cfg.trials
    return SimReport(
        n=cfg.n, R=cfg.R, M=cfg.M, K=cfg.K, L=layering.L, trials=cfg.trials,
        errors=sum(r.error for r in results), block_errors=sum(r.block_errors for r in results),
        seed=cfg.seed, decoder=cfg.decoder, codebook="implicit" if implicit else "materialized",
        ambiguous=sum(r.ambiguous for r in results), empty=sum(r.empty for r in results),
        mean_candidates=sum(r.candidates for r in results) / decodes, notes=notes,
    )
