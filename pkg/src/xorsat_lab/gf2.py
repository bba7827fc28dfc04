"""Bit-packed linear algebra over GF(2).

Matrices are stored row-major with 64 columns per ``uint64`` word; column
``c`` lives in word ``c // 64`` at bit ``c % 64``.  Trailing bits past the last
column are always zero.  All public functions treat their inputs as immutable
and work on private copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

WORD = 64


def n_words(cols: int) -> int:
    return (cols + WORD - 1) // WORD


def _tail_mask(cols: int) -> np.uint64:
    r = cols % WORD
    if r == 0:
        return np.uint64(0xFFFFFFFFFFFFFFFF)
    return np.uint64((1 << r) - 1)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) uint64, LSB first."""
    bits = np.asarray(bits, dtype=np.uint8)
    squeeze = bits.ndim == 1
    if squeeze:
        bits = bits[None, :]
    rows, cols = bits.shape
    w = n_words(cols)
    padded = np.zeros((rows, w * WORD), dtype=np.uint8)
    padded[:, :cols] = bits & 1
    packed = np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64)
    packed = packed.reshape(rows, w)
    return packed[0] if squeeze else packed


def unpack_bits(data: np.ndarray, cols: int) -> np.ndarray:
    data = np.ascontiguousarray(data, dtype=np.uint64)
    squeeze = data.ndim == 1
    if squeeze:
        data = data[None, :]
    as_bytes = data.astype("<u8").view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]
    return bits[0] if squeeze else bits


@dataclass(frozen=True, eq=False)
class GF2Vector:
    """A packed vector in F_2^len."""

    len: int
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape != (n_words(self.len),) or self.data.dtype != np.uint64:
            raise ValueError("data must be a uint64 array of ceil(len/64) words")
        if self.len % WORD and self.data.size and self.data[-1] & ~_tail_mask(self.len):
            raise ValueError("trailing bits beyond len must be zero")
        self.data.setflags(write=False)

    @classmethod
    def zeros(cls, length: int) -> GF2Vector:
        return cls(length, np.zeros(n_words(length), dtype=np.uint64))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> GF2Vector:
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        return cls(arr.size, pack_bits(arr.reshape(-1)))

    @classmethod
    def from_string(cls, s: str) -> GF2Vector:
        if set(s) - {"0", "1"}:
            raise ValueError("expected a 0/1 string")
        return cls.from_bits(np.frombuffer(s.encode(), dtype=np.uint8) - ord("0"))

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.data, self.len)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.to_bits())

    def weight(self) -> int:
        return int(np.bitwise_count(self.data).sum())

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return int((self.data[i // WORD] >> np.uint64(i % WORD)) & np.uint64(1))

    def __xor__(self, other: GF2Vector) -> GF2Vector:
        if other.len != self.len:
            raise ValueError("length mismatch")
        return GF2Vector(self.len, self.data ^ other.data)

    __add__ = __xor__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2Vector) and other.len == self.len and np.array_equal(other.data, self.data)

    def __hash__(self) -> int:
        return hash((self.len, self.data.tobytes()))

    def __repr__(self) -> str:
        s = self.to_string()
        return f"GF2Vector({s if len(s) <= 64 else s[:61] + '...'})"


@dataclass(frozen=True, eq=False)
class GF2Matrix:
    """A packed matrix in F_2^{rows x cols}."""

    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative shape")
        if self.data.shape != (self.rows, n_words(self.cols)) or self.data.dtype != np.uint64:
            raise ValueError("data must be uint64 of shape (rows, ceil(cols/64))")
        if self.cols % WORD and self.rows and np.any(self.data[:, -1] & ~_tail_mask(self.cols)):
            raise ValueError("trailing bits beyond cols must be zero")
        self.data.setflags(write=False)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> GF2Matrix:
        return cls(rows, cols, np.zeros((rows, n_words(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, size: int) -> GF2Matrix:
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense: np.ndarray | Sequence[Sequence[int]]) -> GF2Matrix:
        arr = np.asarray(dense, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(arr.shape[0], arr.shape[1], pack_bits(arr).reshape(arr.shape[0], n_words(arr.shape[1])))

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> GF2Matrix:
        """Build from strings such as ``["110", "011"]``."""
        return cls.from_dense([[int(ch) for ch in r] for r in rows])

    @classmethod
    def from_supports(cls, supports: Sequence[Sequence[int]], cols: int) -> GF2Matrix:
        """Build from per-row lists of column indices holding a one."""
        data = np.zeros((len(supports), n_words(cols)), dtype=np.uint64)
        for i, sup in enumerate(supports):
            for c in sup:
                if not 0 <= c < cols:
                    raise IndexError(c)
                data[i, c // WORD] ^= np.uint64(1) << np.uint64(c % WORD)
        return cls(len(supports), cols, data)

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.data, self.cols).reshape(self.rows, self.cols)

    def transpose(self) -> GF2Matrix:
        return GF2Matrix.from_dense(self.to_dense().T)

    @property
    def T(self) -> GF2Matrix:
        return self.transpose()

    def row(self, i: int) -> GF2Vector:
        return GF2Vector(self.cols, self.data[i].copy())

    def select_rows(self, idx: Sequence[int] | np.ndarray) -> GF2Matrix:
        idx = np.asarray(idx, dtype=np.int64)
        return GF2Matrix(idx.size, self.cols, self.data[idx].copy())

    def select_cols(self, idx: Sequence[int] | np.ndarray) -> GF2Matrix:
        idx = np.asarray(idx, dtype=np.int64)
        return GF2Matrix.from_dense(self.to_dense()[:, idx])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return int((self.data[i, j // WORD] >> np.uint64(j % WORD)) & np.uint64(1))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GF2Matrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"GF2Matrix({self.rows}x{self.cols})"


# ---------------------------------------------------------------------------
# numba kernels (operate in place on private copies)


@numba.njit(cache=True)
def _bit(row, c):
    return (row[c >> 6] >> np.uint64(c & 63)) & np.uint64(1)


@numba.njit(cache=True)
def _rref_kernel(a, pivot_cols):
    """Reduced row echelon form in place; pivots only among the first pivot_cols columns.

    The pivot for each column is the first remaining row holding a one in it.
    Returns the array of pivot columns (row i of the result has pivot piv[i]).
    """
    rows, words = a.shape
    piv = np.empty(min(rows, pivot_cols), dtype=np.int64)
    r = 0
    for c in range(pivot_cols):
        if r == rows:
            break
        w = c >> 6
        m = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, rows):
            if a[i, w] & m:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(words):
                t = a[p, j]
                a[p, j] = a[r, j]
                a[r, j] = t
        for i in range(rows):
            if i != r and (a[i, w] & m):
                for j in range(w, words):
                    a[i, j] ^= a[r, j]
        piv[r] = c
        r += 1
    return piv[:r]


@numba.njit(cache=True)
def _rank_kernel(a, cols, stop_on_dependency):
    """Forward elimination in place.  Returns the rank, or -1 when
    ``stop_on_dependency`` is set and the rows turn out to be dependent."""
    rows, words = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        w = c >> 6
        m = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, rows):
            if a[i, w] & m:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(w, words):
                t = a[p, j]
                a[p, j] = a[r, j]
                a[r, j] = t
        for i in range(p + 1, rows):
            if a[i, w] & m:
                for j in range(w, words):
                    a[i, j] ^= a[r, j]
        r += 1
        if stop_on_dependency and rows - r > cols - c - 1:
            return -1
    if stop_on_dependency and r < rows:
        return -1
    return r


@numba.njit(cache=True)
def _reduce_kernel(basis, piv, r, row):
    # basis[:r] is in RREF, so one pass in any order clears every pivot column
    for i in range(r):
        if _bit(row, piv[i]):
            for j in range(row.shape[0]):
                row[j] ^= basis[i, j]


@numba.njit(cache=True)
def _lowest_bit(row, limit):
    for w in range(row.shape[0]):
        x = row[w]
        if x:
            # isolate lowest set bit and find its index
            low = x & (~x + np.uint64(1))
            b = 0
            while low > np.uint64(1):
                low >>= np.uint64(1)
                b += 1
            c = w * 64 + b
            return c if c < limit else -1
    return -1


@numba.njit(cache=True)
def _insert_kernel(basis, piv, r, row, p):
    for i in range(r):
        if _bit(basis[i], p):
            for j in range(row.shape[0]):
                basis[i, j] ^= row[j]
    for j in range(row.shape[0]):
        basis[r, j] = row[j]
    piv[r] = p


# ---------------------------------------------------------------------------
# public operations


def rank(M: GF2Matrix) -> int:
    """Rank of ``M`` over F_2."""
    if M.rows == 0 or M.cols == 0:
        return 0
    return int(_rank_kernel(M.data.copy(), M.cols, False))


def rows_independent(data: np.ndarray, cols: int) -> bool:
    """True iff the packed rows in ``data`` are linearly independent (early exit)."""
    if data.shape[0] == 0:
        return True
    if data.shape[0] > cols:
        return False
    return _rank_kernel(np.array(data, dtype=np.uint64, copy=True), cols, True) >= 0


def mat_vec(M: GF2Matrix, x: GF2Vector) -> GF2Vector:
    """The product ``M x`` over F_2."""
    if M.cols != x.len:
        raise ValueError(f"dimension mismatch: {M.rows}x{M.cols} times {x.len}")
    parity = np.bitwise_count(M.data & x.data[None, :]).sum(axis=1) & 1
    return GF2Vector.from_bits(parity.astype(np.uint8))


def solve(M: GF2Matrix, b: GF2Vector) -> tuple[GF2Vector, list[GF2Vector]] | None:
    """Solve ``M x = b``.

    Returns ``(particular, nullspace_basis)`` with free variables of the
    particular solution set to zero, or ``None`` if the system is inconsistent.
    """
    if M.rows != b.len:
        raise ValueError(f"dimension mismatch: {M.rows} rows vs rhs of length {b.len}")
    n = M.cols
    aug = np.zeros((M.rows, n_words(n + 1)), dtype=np.uint64)
    aug[:, : M.data.shape[1]] = M.data
    rhs = b.to_bits().astype(np.uint64)
    aug[:, n // WORD] |= rhs << np.uint64(n % WORD)
    piv = _rref_kernel(aug, n)
    r = piv.size
    # a zero row with rhs 1 is an inconsistency; rows below the rank are zero on [0, n)
    if r < M.rows and np.any((aug[r:, n // WORD] >> np.uint64(n % WORD)) & np.uint64(1)):
        return None
    dense = unpack_bits(aug[:r], n + 1).reshape(r, n + 1)
    x = np.zeros(n, dtype=np.uint8)
    x[piv] = dense[:, n]
    free = np.setdiff1d(np.arange(n), piv)
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        v[piv] = dense[:, f]
        basis.append(GF2Vector.from_bits(v))
    return GF2Vector.from_bits(x), basis


def nullspace(M: GF2Matrix) -> list[GF2Vector]:
    """A basis of ``ker M``."""
    res = solve(M, GF2Vector.zeros(M.rows))
    assert res is not None
    return res[1]


def column_submatrix_full_rank(M: GF2Matrix, cols: Iterable[int]) -> bool:
    """True iff the selected columns of ``M`` are linearly independent."""
    idx = np.asarray(sorted(set(int(c) for c in cols)), dtype=np.int64)
    if idx.size == 0:
        return True
    if idx[0] < 0 or idx[-1] >= M.cols:
        raise IndexError("column index out of range")
    sub = pack_bits(M.to_dense()[:, idx].T)
    return rows_independent(sub.reshape(idx.size, -1), M.rows)


class RowBasis:
    """Incrementally grown row space kept in reduced row echelon form.

    Rows have ``cols`` columns; only the first ``pivot_cols`` may hold pivots,
    the rest ride along (e.g. an augmented right-hand side).  A row whose
    pivot region reduces to zero is dependent and is rejected.
    """

    def __init__(self, cols: int, pivot_cols: int | None = None, capacity: int | None = None) -> None:
        self.cols = cols
        self.pivot_cols = cols if pivot_cols is None else pivot_cols
        cap = self.pivot_cols if capacity is None else capacity
        self.words = n_words(cols)
        self._basis = np.zeros((cap, self.words), dtype=np.uint64)
        self._piv = np.zeros(cap, dtype=np.int64)
        self.size = 0

    def reduce(self, row: np.ndarray) -> np.ndarray:
        out = np.array(row, dtype=np.uint64, copy=True)
        _reduce_kernel(self._basis, self._piv, self.size, out)
        return out

    def try_add(self, row: np.ndarray) -> bool:
        red = self.reduce(row)
        p = _lowest_bit(red, self.pivot_cols)
        if p < 0:
            return False
        _insert_kernel(self._basis, self._piv, self.size, red, p)
        self.size += 1
        return True

    def try_add_all(self, rows: np.ndarray) -> bool:
        """Add every row of ``rows`` or none of them."""
        rows = np.asarray(rows, dtype=np.uint64)
        trial = RowBasis(self.cols, self.pivot_cols, capacity=rows.shape[0])
        for row in rows:
            if not trial.try_add(self.reduce(row)):
                return False
        for row in rows:
            added = self.try_add(row)
            assert added
        return True

    @property
    def pivots(self) -> np.ndarray:
        return self._piv[: self.size].copy()

    @property
    def rows(self) -> np.ndarray:
        return self._basis[: self.size].copy()

    def column(self, c: int) -> np.ndarray:
        """Bit ``c`` of every basis row."""
        return ((self._basis[: self.size, c // WORD] >> np.uint64(c % WORD)) & np.uint64(1)).astype(np.uint8)
