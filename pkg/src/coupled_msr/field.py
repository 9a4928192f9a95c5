"""Arithmetic over GF(2^m) and small dense linear algebra.

Elements are plain integers in ``[0, 2^m)``; addition is XOR. Array-valued
helpers broadcast like numpy ufuncs so that one call can process a whole
batch of stripes.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DivisionByZero, PivotSingular, SingularMatrix

# x^8 + x^4 + x^3 + x^2 + 1 and x^16 + x^12 + x^3 + x + 1
DEFAULT_POLYS = {8: 0x11D, 16: 0x1100B}


class FieldContext:
    """Log/antilog tables for GF(2^m) with generator 2."""

    def __init__(self, m: int = 8, reduction_polynomial: int | None = None):
        if m not in DEFAULT_POLYS:
            raise ValueError(f"unsupported field width m={m}")
        poly = DEFAULT_POLYS[m] if reduction_polynomial is None else reduction_polynomial
        if poly >> m != 1:
            raise ValueError(f"reduction polynomial {poly:#x} is not of degree {m}")
        self.m = m
        self.reduction_polynomial = poly
        self.order = 1 << m
        self.dtype = np.uint8 if m == 8 else np.uint16

        size = self.order - 1
        exp = np.zeros(2 * size, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(size):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= poly
        if x != 1 or len(set(exp[:size].tolist())) != size:
            raise ValueError(f"2 is not a generator modulo {poly:#x}")
        exp[size:] = exp[:size]
        self.exp_table = exp
        self.log_table = log
        # 64 KiB full product table makes the byte field a single gather.
        if m == 8:
            idx = np.arange(self.order)
            la = log[idx][:, None] + log[idx][None, :]
            table = exp[la].astype(np.uint8)
            table[0, :] = 0
            table[:, 0] = 0
            self._table = table
        else:
            self._table = None
        self.exp_table.setflags(write=False)
        self.log_table.setflags(write=False)

    def __repr__(self):
        return f"FieldContext(m={self.m}, reduction_polynomial={self.reduction_polynomial:#x})"

    def __eq__(self, other):
        return (
            isinstance(other, FieldContext)
            and self.m == other.m
            and self.reduction_polynomial == other.reduction_polynomial
        )

    def __hash__(self):
        return hash((self.m, self.reduction_polynomial))

    # -- scalar ops --------------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("0 has no multiplicative inverse")
        return int(self.exp_table[(self.order - 1 - self.log_table[a]) % (self.order - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp_table[(self.log_table[a] * e) % (self.order - 1)])

    # -- array ops ---------------------------------------------------------

    def vmul(self, a, b) -> np.ndarray:
        """Elementwise product with numpy broadcasting."""
        a = np.asarray(a)
        b = np.asarray(b)
        if self._table is not None:
            return self._table[a, b]
        out = self.exp_table[self.log_table[a] + self.log_table[b]]
        out = np.where((a == 0) | (b == 0), 0, out)
        return out.astype(self.dtype)

    def scale(self, c: int, arr) -> np.ndarray:
        arr = np.asarray(arr)
        if c == 0:
            return np.zeros(arr.shape, dtype=self.dtype)
        if c == 1:
            return arr.astype(self.dtype, copy=True)
        if self._table is not None:
            return self._table[c][arr]
        out = self.exp_table[self.log_table[arr] + self.log_table[c]]
        return np.where(arr == 0, 0, out).astype(self.dtype)

    def dot(self, matrix, vectors) -> np.ndarray:
        """``matrix @ vectors`` over the field.

        ``matrix`` is (r, c) and ``vectors`` is (c, ...); the trailing axes are
        carried through untouched.
        """
        matrix = np.asarray(matrix)
        vectors = np.asarray(vectors)
        r, c = matrix.shape
        if vectors.shape[0] != c:
            raise ValueError(f"shape mismatch: {matrix.shape} @ {vectors.shape}")
        flat = vectors.reshape(c, -1)
        out = np.zeros((r, flat.shape[1]), dtype=self.dtype)
        for i in range(r):
            for j in range(c):
                coef = int(matrix[i, j])
                if coef:
                    out[i] ^= self.scale(coef, flat[j])
        return out.reshape((r,) + vectors.shape[1:])

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.order, size=shape, dtype=np.int64).astype(self.dtype)

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=self.dtype)


@lru_cache(maxsize=None)
def get_field(m: int = 8, reduction_polynomial: int | None = None) -> FieldContext:
    return FieldContext(m, reduction_polynomial)


def peasant_mul(a: int, b: int, m: int, poly: int) -> int:
    """Shift-and-add product, independent of the log tables."""
    r = 0
    top = 1 << m
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


# -- linear algebra ---------------------------------------------------------


def _as_matrix(ctx: FieldContext, A) -> np.ndarray:
    A = np.array(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return A.astype(ctx.dtype)


def _eliminate(ctx: FieldContext, M: np.ndarray, pivot_row: int, col: int, rows: np.ndarray, start: int = 0):
    """Clear ``M[rows, col]`` using the (normalized) row ``pivot_row``."""
    coefs = M[rows, col]
    nz = rows[coefs != 0]
    if nz.size:
        M[nz, start:] ^= ctx.vmul(M[nz, col][:, None], M[pivot_row, start:][None, :])


def row_reduce(ctx: FieldContext, A, pivot_columns, rhs=None):
    """Gauss-Jordan on the listed columns.

    Returns a row-equivalent matrix whose restriction to ``pivot_columns``
    is the identity (row i pivots on ``pivot_columns[i]``; extra rows are
    left after them). If ``rhs`` is given the same transform is applied
    and ``(reduced, reduced_rhs)`` is returned.
    """
    M = _as_matrix(ctx, A)
    rows, cols = M.shape
    pivot_columns = [int(c) for c in pivot_columns]
    if len(set(pivot_columns)) != len(pivot_columns) or len(pivot_columns) > rows:
        raise PivotSingular("pivot columns must be distinct and at most the row count")
    if rhs is not None:
        R = np.asarray(rhs).astype(ctx.dtype)
        R2 = R.reshape(rows, -1)
        M = np.concatenate([M, R2], axis=1)
    all_rows = np.arange(rows)
    for i, col in enumerate(pivot_columns):
        cand = np.nonzero(M[i:, col])[0]
        if cand.size == 0:
            raise PivotSingular(f"pivot column {col} is dependent on earlier pivots")
        p = i + int(cand[0])
        if p != i:
            M[[i, p]] = M[[p, i]]
        M[i] = ctx.scale(ctx.inv(int(M[i, col])), M[i])
        _eliminate(ctx, M, i, col, all_rows[all_rows != i])
    if rhs is None:
        return M
    return M[:, :cols], M[:, cols:].reshape(R.shape)


def inverse(ctx: FieldContext, A) -> np.ndarray:
    M = _as_matrix(ctx, A)
    n, c = M.shape
    if n != c:
        raise ValueError("inverse needs a square matrix")
    try:
        _, inv = row_reduce(ctx, M, range(n), rhs=np.eye(n, dtype=ctx.dtype))
    except PivotSingular as exc:
        raise SingularMatrix(str(exc)) from None
    return inv


def solve(ctx: FieldContext, A, b) -> np.ndarray:
    """Solve ``A x = b`` for square nonsingular ``A``; ``b`` may carry batch axes."""
    M = _as_matrix(ctx, A)
    if M.shape[0] != M.shape[1]:
        raise ValueError("solve needs a square matrix")
    try:
        _, x = row_reduce(ctx, M, range(M.shape[0]), rhs=b)
    except PivotSingular as exc:
        raise SingularMatrix(str(exc)) from None
    return x


def rank(ctx: FieldContext, A) -> int:
    M = _as_matrix(ctx, A).copy()
    rows, cols = M.shape
    r = 0
    for col in range(cols):
        if r == rows:
            break
        cand = np.nonzero(M[r:, col])[0]
        if cand.size == 0:
            continue
        p = r + int(cand[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
        M[r] = ctx.scale(ctx.inv(int(M[r, col])), M[r])
        below = np.arange(r + 1, rows)
        _eliminate(ctx, M, r, col, below, start=col)
        r += 1
    return r
