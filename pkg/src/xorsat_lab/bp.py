"""Belief propagation for the dual code on the binary symmetric channel.

The dual code is ``{d : B^T d = 0}``: bits are the m constraints (degree k)
and checks are the n variables (degree D).  ``bp_decode`` runs sum-product on
a concrete instance; ``de_threshold`` locates the BP threshold of the
(k, D)-regular ensemble by population-dynamics density evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import theory
from .ensemble import Instance
from .fastrng import below, seed_state, uniform
from .gf2 import GF2Vector
from .rng import RawStream, stream

# Messages are clipped to |L| <= LLR_CAP.  The cap must keep tanh(L/2) below
# 1.0 in double precision (tanh(20) already rounds to 1.0), otherwise arctanh
# returns infinities whose sums can be NaN.
LLR_CAP = 30.0
_T_CAP = math.tanh(LLR_CAP / 2.0)


@dataclass(frozen=True)
class BPResult:
    decoded: GF2Vector
    converged: bool
    iterations: int


def channel_llr(crossover: float) -> float:
    if not 0.0 < crossover < 0.5:
        raise ValueError(f"crossover must lie in (0, 1/2), got {crossover}")
    return math.log((1.0 - crossover) / crossover)


def _check_to_bit(msg: np.ndarray, edge_of_check: np.ndarray) -> np.ndarray:
    """Sum-product check update on all edges, leaving out each edge's own input.

    Works in the sign / log-magnitude domain so that an exactly zero input on
    one edge does not poison the others through a division.
    """
    t = np.tanh(np.clip(msg, -LLR_CAP, LLR_CAP) / 2.0)[edge_of_check]  # (n, D)
    neg = t < 0
    mag = np.abs(t)
    zero = mag == 0.0
    logm = np.log(np.where(zero, 1.0, mag))
    tot = logm.sum(axis=1, keepdims=True)
    nzero = zero.sum(axis=1, keepdims=True)
    sign_all = np.logical_xor.reduce(neg, axis=1, keepdims=True)
    excl_log = tot - logm
    excl_zero = nzero - zero
    prod = np.where(excl_zero > 0, 0.0, np.exp(excl_log))
    prod = np.where(sign_all ^ neg, -prod, prod)
    prod = np.clip(prod, -_T_CAP, _T_CAP)
    out = np.empty_like(msg)
    out[edge_of_check.reshape(-1)] = (2.0 * np.arctanh(prod)).reshape(-1)
    return out


def bp_decode(inst: Instance, received: GF2Vector, crossover: float, max_iters: int = 100) -> BPResult:
    """Flooding sum-product decoding of ``received`` (length m) to a dual codeword."""
    if received.len != inst.m:
        raise ValueError(f"received has length {received.len}, expected m={inst.m}")
    m, k = inst.m, inst.k
    lch = channel_llr(crossover) * (1.0 - 2.0 * received.to_bits().astype(np.float64))
    # edge e = c*k + t joins bit c to check var_of[c, t]
    edge_check = inst.var_of.reshape(-1)
    order = np.argsort(edge_check, kind="stable")
    edge_of_check = order.reshape(inst.n, inst.D)

    def hard(post: np.ndarray) -> np.ndarray:
        return (post < 0).astype(np.uint8)

    def syndrome_zero(bits: np.ndarray) -> bool:
        par = np.bitwise_xor.reduce(bits[inst.cons_of], axis=1)
        return not par.any()

    bits = hard(lch)
    if syndrome_zero(bits):
        return BPResult(GF2Vector.from_bits(bits), True, 0)
    to_check = np.repeat(lch, k)
    for it in range(1, max_iters + 1):
        to_bit = _check_to_bit(to_check, edge_of_check).reshape(m, k)
        post = lch + to_bit.sum(axis=1)
        bits = hard(post)
        if syndrome_zero(bits):
            return BPResult(GF2Vector.from_bits(bits), True, it)
        to_check = np.clip((post[:, None] - to_bit).reshape(-1), -LLR_CAP, LLR_CAP)
    return BPResult(GF2Vector.from_bits(bits), False, max_iters)


def bsc_noise(m: int, crossover: float, seed: int) -> GF2Vector:
    rng = np.random.Generator(stream(seed, 301))
    return GF2Vector.from_bits((rng.random(m) < crossover).astype(np.uint8))


def bp_block_success(inst: Instance, crossover: float, trials: int, seed: int, codeword: GF2Vector | None = None,
                     max_iters: int = 100) -> float:
    """Fraction of BSC trials in which BP returns exactly the transmitted codeword."""
    cw = codeword if codeword is not None else GF2Vector.zeros(inst.m)
    ok = 0
    for t in range(trials):
        noise = bsc_noise(inst.m, crossover, int(stream(seed, 302, t).random_raw()))
        res = bp_decode(inst, cw ^ noise, crossover, max_iters)
        ok += res.converged and res.decoded == cw
    return ok / trials


# ---------------------------------------------------------------------------
# density evolution


@dataclass(frozen=True)
class DEConfig:
    population_size: int = 100_000
    max_iters: int = 2000
    target_error: float = 1e-4
    bisection_tol: float = 2.5e-4
    lo: float = 0.005
    hi: float = 0.3
    stall_window: int = 150
    stall_ratio: float = 0.995
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.population_size < 10_000:
            raise ValueError("population_size must be >= 1e4")
        if self.max_iters < 1 or self.target_error <= 0 or self.bisection_tol <= 0:
            raise ValueError("max_iters, target_error and bisection_tol must be positive")
        if not 0 < self.lo < self.hi < 0.5:
            raise ValueError("need 0 < lo < hi < 1/2")


@numba.njit(cache=True)
def _de_run(k, D, eps, pop_size, max_iters, target, window, ratio, seed):
    """Population dynamics for the all-zero codeword.

    The population holds tanh(L/2) of bit-to-check messages.  Returns
    (converged, iterations, final error) where error is the fraction of
    negative bit-to-check messages (ties count one half).
    """
    s = seed_state(seed)
    lch = math.log((1.0 - eps) / eps)
    tcap = math.tanh(15.0)  # strictly below 1.0 in double precision
    pop = np.empty(pop_size, dtype=np.float64)
    for i in range(pop_size):
        pop[i] = math.tanh((lch if uniform(s) >= eps else -lch) / 2.0)
    new = np.empty(pop_size, dtype=np.float64)
    hist = np.empty(max_iters, dtype=np.float64)
    err = 1.0
    for it in range(max_iters):
        bad = 0.0
        for i in range(pop_size):
            L = lch if uniform(s) >= eps else -lch
            for _ in range(k - 1):
                p = 1.0
                for _ in range(D - 1):
                    p *= pop[below(s, pop_size)]
                if p > tcap:
                    p = tcap
                elif p < -tcap:
                    p = -tcap
                L += 2.0 * math.atanh(p)
            if L < 0.0:
                bad += 1.0
            elif L == 0.0:
                bad += 0.5
            new[i] = math.tanh(L / 2.0)
        pop, new = new, pop
        err = bad / pop_size
        hist[it] = err
        if err <= target:
            return True, it + 1, err
        if it >= 2 * window:
            recent = 0.0
            older = 0.0
            for j in range(window // 3):
                recent += hist[it - j]
                older += hist[it - window - j]
            if recent > ratio * older:
                return False, it + 1, err
    return False, max_iters, err


def de_converges(k: int, D: int, eps: float, cfg: DEConfig, run_seed: int) -> tuple[bool, int, float]:
    ok, iters, err = _de_run(k, D, float(eps), cfg.population_size, cfg.max_iters, cfg.target_error,
                             cfg.stall_window, cfg.stall_ratio, np.uint64(run_seed))
    return bool(ok), int(iters), float(err)


def de_threshold(k: int, D: int, cfg: DEConfig | None = None, trace: list | None = None) -> float:
    """Largest crossover at which the BP message error dies out, by bisection.

    Stopping early when the error stalls (no drop over a window) is what keeps
    the supra-threshold runs short; just below threshold the error keeps
    creeping down and the run continues up to ``max_iters``.
    """
    cfg = cfg or DEConfig()
    raw = RawStream(stream(cfg.seed, 401, k, D))
    lo, hi = cfg.lo, cfg.hi
    while hi - lo > cfg.bisection_tol:
        mid = 0.5 * (lo + hi)
        ok, iters, err = de_converges(k, D, mid, cfg, raw.seed64())
        if trace is not None:
            trace.append(dict(eps=mid, converged=ok, iterations=iters, error=err))
        if ok:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dqi_bp_score(k: int, D: int, cfg: DEConfig | None = None) -> float:
    return theory.bp_score_from_threshold(de_threshold(k, D, cfg))
