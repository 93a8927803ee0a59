"""Entropies over enumerable joints and the robust typicality test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_JOINT_CELLS = 1 << 24
PMF_TOL = 1e-12
JOINT_TOL = 1e-9
_FREQ_SLACK = 1e-12


class JointTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function on ``0..len(probs)-1``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float, copy=True).ravel()
        if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > PMF_TOL:
            raise ValueError(f"not a pmf: {p}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    @classmethod
    def uniform(cls, k: int) -> "Pmf":
        return cls(np.full(k, 1.0 / k))


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)


def entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    q = _probs(p).ravel()
    q = q[q > 0]
    return float(-np.sum(q * np.log2(q)))


def grouped_entropy(groups: np.ndarray, weights: np.ndarray) -> float:
    """Entropy of the law obtained by summing ``weights`` within equal ``groups`` ids."""
    mass = np.bincount(np.asarray(groups).ravel(), weights=np.asarray(weights, dtype=float).ravel())
    return entropy(mass)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint pmf over named discrete variables (array axes follow ``names``)."""

    names: tuple[str, ...]
    sizes: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self):
        names, sizes = tuple(self.names), tuple(int(s) for s in self.sizes)
        if len(set(names)) != len(names) or len(names) != len(sizes):
            raise ValueError("variable names must be unique and match the sizes")
        cells = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
        if cells > MAX_JOINT_CELLS:
            raise JointTooLarge(f"joint table with {cells} cells exceeds the cap of {MAX_JOINT_CELLS}")
        p = np.asarray(self.probs, dtype=float).reshape(sizes)
        if np.any(p < 0) or abs(p.sum() - 1.0) > JOINT_TOL:
            raise ValueError(f"joint probabilities must be nonnegative and sum to 1 (sum={p.sum()})")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probs", p)

    def axes(self, names) -> tuple[int, ...]:
        try:
            return tuple(self.names.index(n) for n in names)
        except ValueError as exc:
            raise KeyError(f"unknown variable in {list(names)}; roster is {list(self.names)}") from exc

    def marginal(self, names) -> np.ndarray:
        keep = self.axes(names)
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        m = self.probs.sum(axis=drop) if drop else self.probs
        # reorder kept axes to the requested order
        order = sorted(keep)
        return np.transpose(m, [order.index(k) for k in keep]) if keep else np.asarray(m)

    def entropy(self, names) -> float:
        return entropy(self.marginal(list(names)))


def conditional_entropy(joint: JointTable, targets, given=()) -> float:
    """H(targets | given) = H(targets, given) - H(given), in bits."""
    targets, given = list(targets), list(given)
    if set(targets) & set(given):
        raise ValueError("targets and given must be disjoint")
    joint.axes(targets + given)
    return joint.entropy(targets + given) - joint.entropy(given)


def counts_batch(seqs: np.ndarray, k: int) -> np.ndarray:
    """Per-row symbol counts of an (M, n) integer array over alphabet ``0..k-1``."""
    seqs = np.asarray(seqs, dtype=np.int64)
    M = seqs.shape[0]
    offs = (np.arange(M, dtype=np.int64)[:, None] * k + seqs).ravel()
    return np.bincount(offs, minlength=M * k).reshape(M, k)


def typical_batch(p, seqs: np.ndarray, eps: float) -> np.ndarray:
    """Robust typicality of each row of ``seqs`` with respect to ``p``."""
    q = _probs(p).ravel()
    seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
    n = seqs.shape[1]
    if n == 0:
        return np.ones(seqs.shape[0], dtype=bool)
    if seqs.size and (seqs.min() < 0 or seqs.max() >= q.size):
        raise ValueError("symbol outside the support of the pmf")
    freq = counts_batch(seqs, q.size) / n
    return np.all(np.abs(freq - q[None, :]) <= eps * q[None, :] + _FREQ_SLACK, axis=1)


def typical(p, xs, eps: float) -> bool:
    """True iff every symbol's relative frequency is within a factor eps of its probability.

    Symbols of probability zero must not occur at all; the empty sequence is
    typical.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    xs = np.asarray(xs, dtype=np.int64).ravel()
    return bool(typical_batch(p, xs[None, :], eps)[0])


def joint_index(seqs, sizes) -> np.ndarray:
    """Flatten a tuple of aligned sequences into joint-symbol indices."""
    arrays = [np.asarray(s, dtype=np.int64) for s in seqs]
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise ValueError(f"sequence length mismatch: {sorted(shapes)}")
    if not arrays:
        raise ValueError("no sequences given")
    return np.ravel_multi_index(tuple(arrays), tuple(sizes))


def joint_typical(seqs, joint: JointTable, eps: float) -> bool:
    """Typicality of the induced sequence of joint symbols (one sequence per roster variable)."""
    seqs = list(seqs)
    if len(seqs) != len(joint.names):
        raise ValueError(f"expected {len(joint.names)} sequences, got {len(seqs)}")
    idx = joint_index(seqs, joint.sizes)
    return typical(joint.probs.ravel(), idx, eps)
