"""Finite-field arithmetic and dense matrix routines over GF(q).

Supported fields are the prime fields GF(p), p <= 2**16, and the binary
extension fields GF(2**m), m <= 16.  Elements are plain integers in
``[0, q)``; for GF(2**m) the bits of an element are the coefficients of
its polynomial representative (bit i is the coefficient of x**i).

All arithmetic methods accept Python ints or numpy integer arrays and
broadcast like numpy ufuncs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_ORDER = 1 << 16

# Primitive trinomials/pentanomials for GF(2^m), given as exponent lists.
_DEFAULT_POLY_EXPONENTS = {
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 4, 3, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 6, 5, 3, 2, 1, 0),
    11: (11, 2, 0),
    12: (12, 7, 6, 5, 3, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 7, 5, 3, 0),
    15: (15, 5, 4, 2, 0),
    16: (16, 5, 3, 2, 0),
}

DEFAULT_POLYS = {m: sum(1 << e for e in exps) for m, exps in _DEFAULT_POLY_EXPONENTS.items()}


class FieldError(ValueError):
    """Raised for unsupported field parameters or illegal field operations."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _gf2_poly_mod(a: int, b: int) -> int:
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def is_irreducible_gf2(poly: int) -> bool:
    """Trial division by every binary polynomial of degree <= deg/2."""
    m = poly.bit_length() - 1
    if m < 1:
        return False
    for d in range(1, m // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if _gf2_poly_mod(poly, f) == 0:
                return False
    return True


def _as_int_array(a):
    return np.asarray(a, dtype=np.int64)


def _wrap(result, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return int(result)
    return result


@dataclass(frozen=True)
class Field:
    """GF(q) with q = p**m.  Build instances with :func:`field_create`."""

    p: int
    m: int = 1
    poly: int | None = None

    @property
    def q(self) -> int:
        return self.p ** self.m

    @property
    def is_prime_field(self) -> bool:
        return self.m == 1

    # tables ------------------------------------------------------------
    @cached_property
    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        q = self.q
        if self.is_prime_field:
            mul = lambda a, b: (a * b) % q  # noqa: E731
        else:
            mul = lambda a, b: _clmul_mod(a, b, self.poly)  # noqa: E731
        for g in range(2 if q > 2 else 1, q):
            exp = np.zeros(2 * (q - 1), dtype=np.int64)
            x = 1
            order = 0
            seen_one = False
            for i in range(q - 1):
                exp[i] = x
                x = mul(x, g)
                order = i + 1
                if x == 1:
                    seen_one = True
                    break
            if seen_one and order == q - 1:
                exp[q - 1:] = exp[: q - 1]
                log = np.zeros(q, dtype=np.int64)
                log[exp[: q - 1]] = np.arange(q - 1)
                return exp, log
        raise FieldError(f"no generator found for GF({q})")  # pragma: no cover

    @cached_property
    def _inv_table(self) -> np.ndarray:
        exp, log = self._exp_log
        q = self.q
        inv = np.zeros(q, dtype=np.int64)
        nz = np.arange(1, q)
        inv[nz] = exp[(q - 1 - log[nz]) % (q - 1)]
        return inv

    # arithmetic --------------------------------------------------------
    def add(self, a, b):
        x, y = _as_int_array(a), _as_int_array(b)
        r = (x + y) % self.p if self.is_prime_field else np.bitwise_xor(x, y)
        return _wrap(r, a, b)

    def neg(self, a):
        x = _as_int_array(a)
        r = (-x) % self.p if self.is_prime_field else x.copy()
        return _wrap(r, a)

    def sub(self, a, b):
        x, y = _as_int_array(a), _as_int_array(b)
        r = (x - y) % self.p if self.is_prime_field else np.bitwise_xor(x, y)
        return _wrap(r, a, b)

    def mul(self, a, b):
        x, y = _as_int_array(a), _as_int_array(b)
        if self.is_prime_field:
            r = (x * y) % self.p
        else:
            exp, log = self._exp_log
            r = exp[log[x] + log[y]]
            r = np.where((x == 0) | (y == 0), 0, r)
        return _wrap(r, a, b)

    def inv(self, a):
        x = _as_int_array(a)
        if np.any(x == 0):
            raise FieldError("inversion of zero")
        return _wrap(self._inv_table[x], a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def sum(self, a, axis=None):
        """Field sum along ``axis`` (all elements when None)."""
        x = _as_int_array(a)
        if axis is None:
            x, axis = x.ravel(), 0
        if self.is_prime_field:
            r = np.sum(x, axis=axis) % self.p
        else:
            r = np.bitwise_xor.reduce(x, axis=axis)
        return int(r) if np.ndim(r) == 0 else r

    def matmul(self, a, b) -> np.ndarray:
        """Matrix product over the field; works on stacked (batched) operands."""
        x, y = _as_int_array(a), _as_int_array(b)
        if self.is_prime_field:
            if x.shape[-1] * (self.p - 1) ** 2 < 2 ** 53:
                # float64 products are exact here and go through BLAS
                return (np.matmul(x.astype(np.float64), y.astype(np.float64)) % self.p).astype(np.int64)
            return np.matmul(x, y) % self.p
        shape = np.broadcast_shapes(x.shape[:-2], y.shape[:-2]) + (x.shape[-2], y.shape[-1])
        out = np.zeros(shape, dtype=np.int64)
        for k in range(x.shape[-1]):
            out ^= self.mul(x[..., :, k:k + 1], y[..., k:k + 1, :])
        return out

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def __str__(self) -> str:
        if self.is_prime_field:
            return f"GF({self.p})"
        return f"GF(2^{self.m})[poly=0x{self.poly:x}]"


def _clmul_mod(a: int, b: int, poly: int) -> int:
    m = poly.bit_length() - 1
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m & 1:
            a ^= poly
    return r


def field_create(p: int, m: int = 1, poly: int | None = None) -> Field:
    """Create GF(p**m).

    Only prime fields and binary extensions are supported.  For m > 1 the
    reduction polynomial defaults to a fixed primitive polynomial; a custom
    one must be irreducible of degree m (bit i = coefficient of x**i).
    """
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise FieldError(f"characteristic {p} is not prime")
    if m < 1:
        raise FieldError("extension degree must be >= 1")
    if m > 1 and p != 2:
        raise FieldError("order not a prime power of supported form: "
                         "only GF(p) and GF(2^m) are supported")
    if p ** m > MAX_ORDER:
        raise FieldError(f"field order {p}^{m} exceeds the cap 2^16")
    if m == 1:
        if poly is not None:
            raise FieldError("a reduction polynomial only applies to extension fields")
        return Field(int(p), 1, None)
    if poly is None:
        poly = DEFAULT_POLYS[m]
    if poly.bit_length() - 1 != m:
        raise FieldError(f"reduction polynomial 0x{poly:x} does not have degree {m}")
    if not is_irreducible_gf2(poly):
        raise FieldError(f"reduction polynomial 0x{poly:x} is reducible over GF(2)")
    return Field(2, int(m), int(poly))


def field_from_order(q: int, poly: int | None = None) -> Field:
    """Create the field of order ``q`` (prime or a power of two)."""
    if is_prime(q):
        return field_create(q, 1, poly)
    if q > 2 and q & (q - 1) == 0:
        return field_create(2, q.bit_length() - 1, poly)
    raise FieldError(f"order {q} not a prime power of supported form")


def ff_inv(f: Field, a: int) -> int:
    return f.inv(a)


@dataclass(frozen=True, eq=False)
class FFMatrix:
    """Dense matrix over a finite field (row-major int64 array)."""

    field: Field
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            raise ValueError("FFMatrix data must be two-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.field.q):
            raise FieldError(f"matrix entry outside [0, {self.field.q})")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_rows(cls, f: Field, rows, cols: int | None = None) -> "FFMatrix":
        rows = list(rows)
        if not rows:
            return cls(f, np.zeros((0, cols or 0), dtype=np.int64))
        return cls(f, np.array(rows, dtype=np.int64))

    @classmethod
    def zeros(cls, f: Field, rows: int, cols: int) -> "FFMatrix":
        return cls(f, np.zeros((rows, cols), dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> "FFMatrix":
        return FFMatrix(self.field, self.data.T)

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __eq__(self, other):
        if not isinstance(other, FFMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"FFMatrix({self.field}, {self.tolist()})"


def mat_rank(A: FFMatrix) -> int:
    """Rank over GF(q) by Gaussian elimination.

    The pivot in each column is the first nonzero entry at or below the
    current row, so the elimination sequence is fully deterministic.
    """
    f = A.field
    M = A.data.copy()
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        M[r] = f.mul(M[r], f.inv(int(M[r, c])))
        below = M[r + 1:, c]
        if np.any(below):
            M[r + 1:] = f.sub(M[r + 1:], f.mul(below[:, None], M[r][None, :]))
        r += 1
    return r


def batch_rank(f: Field, mats) -> np.ndarray:
    """Ranks of a stack of matrices with shape (B, rows, cols)."""
    M = _as_int_array(mats).copy()
    if M.ndim != 3:
        raise ValueError("batch_rank expects a (B, rows, cols) array")
    B, rows, cols = M.shape
    rank = np.zeros(B, dtype=np.int64)
    if rows == 0 or cols == 0 or B == 0:
        return rank
    row_idx = np.arange(rows)
    bidx = np.arange(B)
    for c in range(cols):
        cand = (M[:, :, c] != 0) & (row_idx[None, :] >= rank[:, None])
        has = cand.any(axis=1) & (rank < rows)
        if not has.any():
            continue
        b = bidx[has]
        piv = np.argmax(cand[has], axis=1)
        r = rank[has]
        prow = M[b, piv].copy()
        M[b, piv] = M[b, r]
        prow = f.mul(prow, f.inv(prow[:, c])[:, None])
        M[b, r] = prow
        below = (row_idx[None, :] > r[:, None])
        factors = np.where(below, M[b, :, c], 0)
        M[b] = f.sub(M[b], f.mul(factors[:, :, None], prow[:, None, :]))
        rank[has] += 1
    return rank


def mat_vec_mul(A: FFMatrix, x) -> np.ndarray:
    """y = A x over the matrix's field."""
    v = _as_int_array(x)
    if v.ndim != 1 or v.shape[0] != A.cols:
        raise ValueError(f"dimension mismatch: matrix has {A.cols} columns, vector length {v.shape}")
    if A.rows == 0:
        return np.zeros(0, dtype=np.int64)
    if A.cols == 0:
        return np.zeros(A.rows, dtype=np.int64)
    f = A.field
    return f.sum(f.mul(A.data, v[None, :]), axis=1)
