"""Prime-field arithmetic and dense linear algebra over F_p.

Matrices are stored as read-only ``int64`` numpy arrays with entries in
``[0, p)``. The modulus is capped below ``2**31`` so a product of two
elements always fits in a signed 64-bit integer; matrix products split one
operand into 16-bit halves so that inner-product sums cannot overflow either.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import Singular, ValidationError, ZeroInverse

DEFAULT_PRIME = 2147483647
MAX_MODULUS = 1 << 31

# deterministic Miller-Rabin witnesses for every n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic primality test, exact for all 64-bit inputs."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


@dataclass(frozen=True)
class FieldContext:
    """The prime field F_p."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise ValidationError(f"field modulus must be an integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        if self.p >= MAX_MODULUS:
            raise ValidationError(f"field modulus {self.p} must be below 2**31")
        if not is_prime(self.p):
            raise ValidationError(f"field modulus {self.p} is not prime")

    def reduce(self, values) -> np.ndarray:
        """Map integers (any size, any sign) into ``[0, p)`` as int64."""
        arr = np.asarray(values)
        if arr.dtype == object:
            arr = arr % self.p
        return arr.astype(np.int64) % self.p


def _needs_object(values) -> bool:
    # python ints beyond int64 range must be reduced before the cast
    return np.asarray(values).dtype == object


def fp_inv(a: int, ctx: FieldContext) -> int:
    """Multiplicative inverse of ``a`` in F_p."""
    a = int(a) % ctx.p
    if a == 0:
        raise ZeroInverse("zero has no inverse in F_p")
    return pow(a, -1, ctx.p)


def inv_array(a: np.ndarray, p: int) -> np.ndarray:
    """Elementwise inverse by Fermat's little theorem; zeros map to zero."""
    a = np.asarray(a, dtype=np.int64) % p
    result = np.ones_like(a)
    base = a.copy()
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return np.where(a == 0, 0, result)


def mod_matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``a @ b mod p`` for int64 operands already reduced mod p < 2**31."""
    if a.shape[-1] >= 1 << 16:
        raise ValueError("inner dimension too large for split multiplication")
    lo = b & 0xFFFF
    hi = b >> 16
    r_hi = (a @ hi) % p
    r_lo = (a @ lo) % p
    return (r_hi * 65536 + r_lo) % p


class FieldMatrix:
    """Immutable dense matrix over F_p."""

    __slots__ = ("ctx", "data")

    def __init__(self, ctx: FieldContext, data):
        arr = np.array(data, dtype=object if _needs_object(data) else np.int64)
        if arr.ndim != 2:
            raise ValueError(f"matrix data must be 2-D, got shape {arr.shape}")
        arr = (arr % ctx.p).astype(np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FieldMatrix is immutable")

    # constructors
    @classmethod
    def zeros(cls, ctx: FieldContext, rows: int, cols: int) -> "FieldMatrix":
        return cls(ctx, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, ctx: FieldContext, size: int) -> "FieldMatrix":
        return cls(ctx, np.eye(size, dtype=np.int64))

    @classmethod
    def diag(cls, ctx: FieldContext, values: Sequence[int]) -> "FieldMatrix":
        return cls(ctx, np.diag(np.asarray(values, dtype=np.int64) % ctx.p))

    @classmethod
    def column(cls, ctx: FieldContext, values: Iterable[int]) -> "FieldMatrix":
        return cls(ctx, np.asarray(list(values), dtype=np.int64).reshape(-1, 1))

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.p != other.p:
            raise ValueError("matrices live in different fields")
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return FieldMatrix(self.ctx, mod_matmul(self.data, other.data, self.p))

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        return FieldMatrix(self.ctx, (self.data + other.data) % self.p)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        return FieldMatrix(self.ctx, (self.data - other.data) % self.p)

    def scale(self, c: int) -> "FieldMatrix":
        return FieldMatrix(self.ctx, self.data * (int(c) % self.p) % self.p)

    def hstack(self, *others: "FieldMatrix") -> "FieldMatrix":
        return FieldMatrix(self.ctx, np.hstack([self.data] + [o.data for o in others]))

    def columns(self, idx) -> "FieldMatrix":
        return FieldMatrix(self.ctx, self.data[:, idx])

    def is_zero(self) -> bool:
        return not self.data.any()

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.p, self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"FieldMatrix(p={self.p}, {self.tolist()})"

    def rank(self) -> int:
        return mat_rank(self)

    def inverse(self) -> "FieldMatrix":
        return mat_inv(self)


def row_reduce(data: np.ndarray, p: int, pivot_cols: int | None = None):
    """Reduced row-echelon form over F_p.

    Pivots are the first nonzero entry at or below the current row (lowest
    row index wins). Only the first ``pivot_cols`` columns are searched for
    pivots; row operations still act on the full width.

    Returns:
        (R, pivots): the reduced matrix and the list of pivot columns.
    """
    r = np.array(data, dtype=np.int64) % p
    m, ncols = r.shape
    if pivot_cols is None:
        pivot_cols = ncols
    pivots: list[int] = []
    row = 0
    for col in range(pivot_cols):
        if row == m:
            break
        nz = np.flatnonzero(r[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            r[[row, piv]] = r[[piv, row]]
        r[row] = r[row] * pow(int(r[row, col]), -1, p) % p
        factors = r[:, col].copy()
        factors[row] = 0
        mask = factors != 0
        if mask.any():
            r[mask] = (r[mask] - factors[mask, None] * r[row]) % p
        pivots.append(col)
        row += 1
    return r, pivots


def mat_rank(m: FieldMatrix) -> int:
    """Rank over F_p by row reduction."""
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots = row_reduce(m.data, m.p)
    return len(pivots)


def mat_solve(a: FieldMatrix, y: FieldMatrix) -> FieldMatrix:
    """Solve ``a @ x = y`` for square nonsingular ``a``; ``y`` may have several columns."""
    n = a.rows
    if a.cols != n:
        raise ValueError(f"mat_solve needs a square matrix, got {a.shape}")
    if y.rows != n:
        raise ValueError(f"right-hand side has {y.rows} rows, expected {n}")
    r, pivots = row_reduce(np.hstack([a.data, y.data]), a.p, pivot_cols=n)
    if len(pivots) < n:
        raise Singular(f"matrix is singular (rank {len(pivots)} < {n})")
    return FieldMatrix(a.ctx, r[:, n:])


def mat_inv(a: FieldMatrix) -> FieldMatrix:
    return mat_solve(a, FieldMatrix.identity(a.ctx, a.rows))


def mat_mul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    return a @ b
