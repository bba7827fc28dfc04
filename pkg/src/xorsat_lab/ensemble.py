"""Gallager's ensemble of (k, D)-regular max-k-XORSAT instances.

An instance stores ``k`` permutations of ``range(D*b)`` and a target vector.
The constraint matrix ``B`` (m x n, m = D*b, n = k*b) is reconstructed from
the permutations: constraint ``w`` involves variable ``i*b + perm_i[w] % b``
for each layer ``i``.  Equivalently the transpose ``B^T`` stacks the ``k``
row blocks ``[I_b ... I_b] P_i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from pathlib import Path

import numba
import numpy as np
from scipy import sparse

from .gf2 import GF2Matrix, GF2Vector, n_words
from .rng import RawStream, fisher_yates, streams


@dataclass(frozen=True, eq=False)
class Instance:
    k: int
    D: int
    b: int
    perms: tuple[np.ndarray, ...]
    v: GF2Vector
    seed: int = 0

    def __post_init__(self) -> None:
        validate_params(self.k, self.D, self.b, allow_degenerate=True)
        if len(self.perms) != self.k:
            raise ValueError(f"expected {self.k} permutations, got {len(self.perms)}")
        size = self.D * self.b
        for p in self.perms:
            p.setflags(write=False)
            if p.shape != (size,) or not np.array_equal(np.sort(p), np.arange(size)):
                raise ValueError("each permutation must be a bijection on range(D*b)")
        if self.v.len != self.m:
            raise ValueError(f"target has length {self.v.len}, expected m={self.m}")

    @property
    def m(self) -> int:
        return self.D * self.b

    @property
    def n(self) -> int:
        return self.k * self.b

    @cached_property
    def var_of(self) -> np.ndarray:
        """(m, k) array: the variables of each constraint, one per layer."""
        cols = [i * self.b + (p % self.b) for i, p in enumerate(self.perms)]
        out = np.stack(cols, axis=1).astype(np.int64)
        out.setflags(write=False)
        return out

    @cached_property
    def cons_of(self) -> np.ndarray:
        """(n, D) array: the constraints containing each variable, ascending."""
        flat_var = self.var_of.reshape(-1)
        cons = np.repeat(np.arange(self.m), self.k)
        order = np.lexsort((cons, flat_var))
        out = cons[order].reshape(self.n, self.D)
        out.setflags(write=False)
        return out

    @cached_property
    def B(self) -> GF2Matrix:
        return GF2Matrix.from_supports(self.var_of.tolist(), self.n)

    @cached_property
    def BT(self) -> GF2Matrix:
        return GF2Matrix.from_supports(self.cons_of.tolist(), self.m)

    @cached_property
    def v_bits(self) -> np.ndarray:
        out = self.v.to_bits().astype(np.uint8)
        out.setflags(write=False)
        return out

    def B_sparse(self) -> sparse.csr_matrix:
        rows = np.repeat(np.arange(self.m), self.k)
        return sparse.csr_matrix(
            (np.ones(self.m * self.k, dtype=np.int64), (rows, self.var_of.reshape(-1))), shape=(self.m, self.n)
        )

    def unsatisfied(self, x: np.ndarray) -> int:
        """|B x - v| for a 0/1 assignment ``x``."""
        x = np.asarray(x, dtype=np.uint8)
        par = np.bitwise_xor.reduce(x[self.var_of], axis=1)
        return int(np.count_nonzero(par ^ self.v_bits))

    def satisfied(self, x: np.ndarray) -> int:
        return self.m - self.unsatisfied(x)

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "D": self.D,
            "b": self.b,
            "seed": int(self.seed),
            "perms": [p.tolist() for p in self.perms],
            "v": self.v.to_string(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> Instance:
        return cls(
            k=int(d["k"]),
            D=int(d["D"]),
            b=int(d["b"]),
            perms=tuple(np.asarray(p, dtype=np.int64) for p in d["perms"]),
            v=GF2Vector.from_string(d["v"]),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> Instance:
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Instance:
        return cls.from_json(Path(path).read_text())


def validate_params(k: int, D: int, b: int, allow_degenerate: bool = False) -> None:
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    if k < 2 or (D <= k and not allow_degenerate) or D < 1:
        raise ValueError(f"need D > k >= 2, got k={k}, D={D}")


def sample_instance(k: int, D: int, b: int, seed: int) -> Instance:
    """Draw an instance from Gallager's ensemble G(k, D, b).

    One Philox sub-stream per layer permutation plus one for the target, so
    any single component can be regenerated independently.
    """
    validate_params(k, D, b)
    gens = streams(seed, k + 1)
    perms = tuple(fisher_yates(D * b, RawStream(g)) for g in gens[:k])
    m = D * b
    words = gens[k].random_raw(n_words(m)).astype(np.uint64)
    if m % 64:
        words[-1] &= np.uint64((1 << (m % 64)) - 1)
    return Instance(k, D, b, perms, GF2Vector(m, words), seed=seed)


def identity_instance(k: int, D: int, b: int, v: GF2Vector | None = None) -> Instance:
    """The degenerate member with every permutation the identity."""
    m = D * b
    perms = tuple(np.arange(m, dtype=np.int64) for _ in range(k))
    return Instance(k, D, b, perms, v if v is not None else GF2Vector.zeros(m))


@dataclass(frozen=True)
class BlockPartition:
    blocks: tuple[np.ndarray, ...]
    defining_variable: np.ndarray = field(repr=False)

    @property
    def block_of(self) -> np.ndarray:
        out = np.empty(sum(len(s) for s in self.blocks), dtype=np.int64)
        for i, s in enumerate(self.blocks):
            out[s] = i
        return out


def block_partition(inst: Instance) -> BlockPartition:
    """Blocks cut out by the first layer of checks.

    Any layer would do; the first is used so the partition is canonical.
    """
    layer = inst.perms[0] % inst.b
    order = np.lexsort((np.arange(inst.m), layer))
    blocks = tuple(order.reshape(inst.b, inst.D))
    return BlockPartition(blocks=blocks, defining_variable=np.arange(inst.b, dtype=np.int64))


# ---------------------------------------------------------------------------
# short cycles and local tree structure of the Tanner graph


def _csr(supports: list[list[int]] | np.ndarray, n_right: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """CSR adjacency both ways for a bipartite graph given left-vertex supports."""
    indptr = np.zeros(len(supports) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(s) for s in supports])
    indices = np.fromiter((c for s in supports for c in s), dtype=np.int64, count=int(indptr[-1]))
    left = np.repeat(np.arange(len(supports)), np.diff(indptr))
    order = np.lexsort((left, indices))
    r_indptr = np.zeros(n_right + 1, dtype=np.int64)
    np.add.at(r_indptr, indices + 1, 1)
    r_indptr = np.cumsum(r_indptr)
    return indptr, indices, r_indptr, left[order]


@numba.njit(cache=True)
def _has(indptr, indices, u, w):
    for t in range(indptr[u], indptr[u + 1]):
        if indices[t] == w:
            return True
    return False


@numba.njit(cache=True)
def _six_cycles(c_ptr, c_idx, b_ptr, b_idx):
    total = 0
    nc = c_ptr.size - 1
    for u1 in range(nc):
        for t1 in range(c_ptr[u1], c_ptr[u1 + 1]):
            w1 = c_idx[t1]
            for s1 in range(b_ptr[w1], b_ptr[w1 + 1]):
                u2 = b_idx[s1]
                if u2 <= u1:
                    continue
                for t2 in range(c_ptr[u2], c_ptr[u2 + 1]):
                    w2 = c_idx[t2]
                    if w2 == w1:
                        continue
                    for s2 in range(b_ptr[w2], b_ptr[w2 + 1]):
                        u3 = b_idx[s2]
                        if u3 <= u1 or u3 == u2:
                            continue
                        for t3 in range(c_ptr[u3], c_ptr[u3 + 1]):
                            w3 = c_idx[t3]
                            if w3 == w1 or w3 == w2:
                                continue
                            if _has(c_ptr, c_idx, u1, w3):
                                total += 1
    return total // 2


def count_cycles(check_supports, n_bits: int, ell: int) -> int:
    """Number of simple cycles through ``ell`` checks and ``ell`` bits (2*ell edges)."""
    if ell == 2:
        A = sparse.csr_matrix(
            (
                np.ones(sum(len(s) for s in check_supports), dtype=np.int64),
                (np.repeat(np.arange(len(check_supports)), [len(s) for s in check_supports]),
                 np.fromiter((c for s in check_supports for c in s), dtype=np.int64)),
            ),
            shape=(len(check_supports), n_bits),
        )
        overlap = sparse.triu(A @ A.T, k=1).tocoo().data
        return int(sum(comb(int(o), 2) for o in overlap))
    if ell == 3:
        c_ptr, c_idx, b_ptr, b_idx = _csr(check_supports, n_bits)
        return int(_six_cycles(c_ptr, c_idx, b_ptr, b_idx))
    raise ValueError(f"unsupported cycle length ell={ell}; use 2 or 3")


def count_short_cycles(inst: Instance, ell: int) -> int:
    """Exact count of ell-cycles (ell checks, ell bits) in the Tanner graph of B^T."""
    return count_cycles(inst.cons_of, inst.m, ell)


@numba.njit(cache=True)
def _tainted(ptr, idx, radius):
    nv = ptr.size - 1
    stamp = np.full(nv, -1, dtype=np.int64)
    dist = np.zeros(nv, dtype=np.int64)
    queue = np.empty(nv, dtype=np.int64)
    bad = 0
    for x in range(nv):
        head = 0
        tail = 0
        queue[tail] = x
        tail += 1
        stamp[x] = x
        dist[x] = 0
        while head < tail:
            u = queue[head]
            head += 1
            if dist[u] == radius:
                continue
            for t in range(ptr[u], ptr[u + 1]):
                w = idx[t]
                if stamp[w] != x:
                    stamp[w] = x
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        # edges of the induced subgraph on the ball
        deg_sum = 0
        for q in range(tail):
            u = queue[q]
            for t in range(ptr[u], ptr[u + 1]):
                if stamp[idx[t]] == x:
                    deg_sum += 1
        if deg_sum // 2 != tail - 1:
            bad += 1
    return bad


def tanner_adjacency(check_supports, n_bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Unified CSR over checks (0..nc-1) then bits (nc..nc+n_bits-1)."""
    c_ptr, c_idx, b_ptr, b_idx = _csr(check_supports, n_bits)
    nc = c_ptr.size - 1
    ptr = np.concatenate([c_ptr, c_ptr[-1] + b_ptr[1:]]).astype(np.int64)
    idx = np.concatenate([c_idx + nc, b_idx]).astype(np.int64)
    return ptr, idx


def nontreelike_count(check_supports, n_bits: int, ell: int) -> int:
    """Vertices whose radius-2*ell ball contains a cycle."""
    ptr, idx = tanner_adjacency(check_supports, n_bits)
    return int(_tainted(ptr, idx, 2 * ell))


def treelike_fraction(inst: Instance, ell: int) -> float:
    """Fraction of Tanner-graph vertices whose radius-2*ell ball is a tree."""
    return 1.0 - nontreelike_count(inst.cons_of, inst.m, ell) / (inst.n + inst.m)


def check_regular(inst: Instance) -> None:
    """Raise if B fails to have k ones per row and D ones per column."""
    A = inst.B.to_dense()
    if not (np.all(A.sum(axis=1) == inst.k) and np.all(A.sum(axis=0) == inst.D)):
        raise AssertionError("degree regularity violated")
