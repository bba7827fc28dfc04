"""Classical baselines: Prange, Turbo Prange, simulated annealing, greedy descent."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .ensemble import Instance, block_partition
from .gf2 import GF2Vector, RowBasis, n_words, pack_bits, unpack_bits
from .fastrng import shuffle, uniform, seed_state
from .rng import RawStream, fisher_yates, stream

# stream keys, so each solver draws from its own family of Philox streams
_KEY_PRANGE = 101
_KEY_TURBO = 102
_KEY_SA = 103
_KEY_GREEDY = 104


@dataclass(frozen=True)
class SolveResult:
    assignment: GF2Vector
    satisfied: int
    score: float
    solver: str
    seed: int
    sweeps_or_iters: int
    wall_time: float
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "seed": int(self.seed),
            "satisfied": int(self.satisfied),
            "score": float(self.score),
            "sweeps_or_iters": int(self.sweeps_or_iters),
            "wall_time": float(self.wall_time),
            "assignment": self.assignment.to_string(),
            **{k: v for k, v in self.extra.items()},
        }


def _result(inst: Instance, x: np.ndarray, solver: str, seed: int, iters: int, t0: float, **extra) -> SolveResult:
    sat = inst.satisfied(x)
    return SolveResult(
        assignment=GF2Vector.from_bits(x.astype(np.uint8)),
        satisfied=sat,
        score=sat / inst.m,
        solver=solver,
        seed=int(seed),
        sweeps_or_iters=int(iters),
        wall_time=time.perf_counter() - t0,
        extra=extra,
    )


def _augmented_rows(inst: Instance) -> np.ndarray:
    """Rows of [B | v] packed, with v in column n."""
    n = inst.n
    dense = np.zeros((inst.m, n + 1), dtype=np.uint8)
    dense[np.arange(inst.m)[:, None], inst.var_of] = 1
    dense[:, n] = inst.v_bits
    return pack_bits(dense)


def _solution_from_basis(basis: RowBasis, n: int) -> np.ndarray:
    """Pivot variables take the reduced right-hand side, free variables are 0."""
    x = np.zeros(n, dtype=np.uint8)
    if basis.size:
        x[basis.pivots] = basis.column(n)
    return x


def prange(inst: Instance, seed: int) -> SolveResult:
    """Solve a maximal independent subset of the equations, chosen greedily in random order."""
    t0 = time.perf_counter()
    raw = RawStream(stream(seed, _KEY_PRANGE))
    order = fisher_yates(inst.m, raw)
    rows = _augmented_rows(inst)
    basis = RowBasis(inst.n + 1, pivot_cols=inst.n, capacity=inst.n)
    solved = []
    for i in order:
        if basis.try_add(rows[i]):
            solved.append(int(i))
            if basis.size == inst.n:
                break
    x = _solution_from_basis(basis, inst.n)
    return _result(inst, x, "prange", seed, len(solved), t0, solved_equations=len(solved))


def turbo_prange(inst: Instance, seed: int, extra_greedy: bool = False) -> SolveResult:
    """Pack whole blocks of the layer-one partition, then fix unsolved blocks by majority.

    Blocks are visited in random order and kept only if all of their rows
    extend the independent set.  Afterwards each unpacked block's defining
    variable is flipped iff that strictly raises the block's satisfied count;
    the variable occurs in no other constraint, so flips never interact.
    """
    t0 = time.perf_counter()
    part = block_partition(inst)
    raw = RawStream(stream(seed, _KEY_TURBO))
    order = fisher_yates(len(part.blocks), raw)
    rows = _augmented_rows(inst)
    basis = RowBasis(inst.n + 1, pivot_cols=inst.n, capacity=inst.n)
    packed = np.zeros(len(part.blocks), dtype=bool)
    for j in order:
        if basis.size + inst.D > inst.n:
            continue
        if basis.try_add_all(rows[part.blocks[j]]):
            packed[j] = True
    x = _solution_from_basis(basis, inst.n)

    var_of = inst.var_of
    v = inst.v_bits
    flips = 0
    for j in np.flatnonzero(~packed):
        cons = part.blocks[j]
        unsat = int(np.count_nonzero(np.bitwise_xor.reduce(x[var_of[cons]], axis=1) ^ v[cons]))
        if 2 * unsat > inst.D:
            x[part.defining_variable[j]] ^= 1
            flips += 1
    iters = flips
    if extra_greedy:
        g = greedy(inst, GF2Vector.from_bits(x), seed)
        x = g.assignment.to_bits().astype(np.uint8)
        iters += g.sweeps_or_iters
    n_packed = int(packed.sum())
    return _result(
        inst,
        x,
        "turbo-prange+greedy" if extra_greedy else "turbo-prange",
        seed,
        iters,
        t0,
        packed_blocks=n_packed,
        packed_fraction=n_packed * inst.D / inst.m,
        packed_mask=packed,
        defining_flips=flips,
    )


# ---------------------------------------------------------------------------
# local search kernels


@numba.njit(cache=True)
def _unsat_vector(x, var_of, v):
    m, k = var_of.shape
    u = np.empty(m, dtype=np.uint8)
    for c in range(m):
        p = v[c]
        for t in range(k):
            p ^= x[var_of[c, t]]
        u[c] = p
    return u


@numba.njit(cache=True)
def _anneal(x, var_of, cons_of, v, betas, seed, trace):
    """Metropolis annealing in place on x.  Returns the best assignment seen
    at sweep boundaries and its unsatisfied count."""
    n = x.shape[0]
    D = cons_of.shape[1]
    s = seed_state(seed)
    u = _unsat_vector(x, var_of, v)
    cur = 0
    for c in range(u.shape[0]):
        cur += u[c]
    best = cur
    best_x = x.copy()
    order = np.arange(n)
    for sweep in range(betas.shape[0]):
        beta = betas[sweep]
        shuffle(order, s)
        for idx in range(n):
            i = order[idx]
            bad = 0
            for t in range(D):
                bad += u[cons_of[i, t]]
            delta = D - 2 * bad  # change in unsatisfied count
            accept = delta <= 0
            if not accept:
                if math.isinf(beta):
                    accept = False
                else:
                    accept = uniform(s) < math.exp(-beta * delta)
            if accept:
                x[i] ^= 1
                for t in range(D):
                    u[cons_of[i, t]] ^= 1
                cur += delta
        if trace.shape[0] > 0:
            trace[sweep] = cur
        if cur < best:
            best = cur
            best_x[:] = x
    return best_x, best


@numba.njit(cache=True)
def _descend(x, var_of, cons_of, v, seed):
    """Flip improving variables until none remain.  Returns the flip count."""
    n = x.shape[0]
    D = cons_of.shape[1]
    s = seed_state(seed)
    u = _unsat_vector(x, var_of, v)
    order = np.arange(n)
    flips = 0
    improved = True
    while improved:
        improved = False
        shuffle(order, s)
        for idx in range(n):
            i = order[idx]
            bad = 0
            for t in range(D):
                bad += u[cons_of[i, t]]
            if 2 * bad > D:
                x[i] ^= 1
                for t in range(D):
                    u[cons_of[i, t]] ^= 1
                flips += 1
                improved = True
    return flips


@dataclass(frozen=True)
class SAConfig:
    sweeps: int = 10_000
    beta_start: float = 0.2
    beta_end: float = 4.0
    seeds: int = 4
    schedule: str = "linear"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if not self.beta_start <= self.beta_end:
            raise ValueError("beta_start must not exceed beta_end")
        if self.schedule not in ("linear", "geometric", "constant"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    def betas(self) -> np.ndarray:
        if self.schedule == "constant" or math.isinf(self.beta_start) or self.sweeps == 1:
            return np.full(self.sweeps, self.beta_end, dtype=np.float64)
        if self.schedule == "linear":
            return np.linspace(self.beta_start, self.beta_end, self.sweeps)
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps)


def simulated_annealing(inst: Instance, cfg: SAConfig, trace: bool = False) -> SolveResult:
    """Best of ``cfg.seeds`` independent annealing runs from random starts."""
    t0 = time.perf_counter()
    var_of = np.ascontiguousarray(inst.var_of)
    cons_of = np.ascontiguousarray(inst.cons_of)
    v = np.ascontiguousarray(inst.v_bits)
    betas = cfg.betas()
    best_x, best_u, best_seed, traces = None, None, None, []
    for r in range(cfg.seeds):
        raw = RawStream(stream(cfg.seed, _KEY_SA, r))
        run_seed = raw.seed64()
        x0 = unpack_bits(raw.words(n_words(inst.n)), inst.n).astype(np.uint8)
        tr = np.zeros(cfg.sweeps if trace else 0, dtype=np.int64)
        x, u = _anneal(x0, var_of, cons_of, v, betas, np.uint64(run_seed), tr)
        traces.append(inst.m - tr)
        if best_u is None or u < best_u:
            best_x, best_u, best_seed = x, u, r
    extra = dict(schedule=cfg.schedule, beta_start=cfg.beta_start, beta_end=cfg.beta_end, runs=cfg.seeds,
                 best_run=best_seed)
    if trace:
        extra["satisfied_trace"] = traces
    return _result(inst, best_x, "sa", cfg.seed, cfg.sweeps, t0, **extra)


def greedy(inst: Instance, start: GF2Vector, seed: int) -> SolveResult:
    """Single-flip descent to a local optimum, scanning variables in random order."""
    if start.len != inst.n:
        raise ValueError(f"start has length {start.len}, expected n={inst.n}")
    t0 = time.perf_counter()
    raw = RawStream(stream(seed, _KEY_GREEDY))
    x = start.to_bits().astype(np.uint8)
    flips = _descend(x, np.ascontiguousarray(inst.var_of), np.ascontiguousarray(inst.cons_of),
                     np.ascontiguousarray(inst.v_bits), np.uint64(raw.seed64()))
    return _result(inst, x, "greedy", seed, flips, t0)
