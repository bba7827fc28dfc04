"""The classical channel induced by the block-wise unambiguous measurement.

Each block of D constraints is independently erased with probability 1 - p0;
unerased blocks reveal their part of the error exactly.  Decoding succeeds
iff the erased positions are pinned down uniquely by the parity checks,
i.e. iff the corresponding rows of B are linearly independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.stats import binomtest

from . import theory
from .ensemble import Instance, block_partition, sample_instance
from .gf2 import pack_bits, rows_independent
from .rng import stream


@dataclass(frozen=True)
class ErasureTrial:
    erased_blocks: np.ndarray
    nu: int
    recovered: bool


@dataclass(frozen=True)
class ThresholdCurve:
    k: int
    D: int
    b: int
    erasure_rates: list[float]
    success_probs: list[float]
    successes: list[int]
    trials_per_point: int
    confidence_halfwidth: list[float]
    crossing: float | None = None
    width: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def rows(self) -> list[dict]:
        return [
            dict(rate=r, successes=s, trials=self.trials_per_point, ci_halfwidth=h)
            for r, s, h in zip(self.erasure_rates, self.successes, self.confidence_halfwidth)
        ]


CSV_FIELDS = ["rate", "successes", "trials", "ci_halfwidth"]


@numba.njit(cache=True)
def _peel(var_of, rows, n):
    """Strip rows owning a column no other selected row touches.

    Such a row cannot take part in any dependency, so the selected rows are
    independent iff the returned core is.
    """
    r = rows.shape[0]
    k = var_of.shape[1]
    deg = np.zeros(n, dtype=np.int64)
    # xor of the (local) row ids touching each column; for degree-1 columns
    # this is exactly the owning row
    owner = np.zeros(n, dtype=np.int64)
    for a in range(r):
        for t in range(k):
            c = var_of[rows[a], t]
            deg[c] += 1
            owner[c] ^= a
    alive = np.ones(r, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for c in range(n):
        if deg[c] == 1:
            stack[top] = c
            top += 1
    while top > 0:
        top -= 1
        c = stack[top]
        if deg[c] != 1:
            continue
        a = owner[c]
        alive[a] = False
        for t in range(k):
            cc = var_of[rows[a], t]
            deg[cc] -= 1
            owner[cc] ^= a
            if deg[cc] == 1:
                stack[top] = cc
                top += 1
    return rows[alive]


def rows_recoverable(inst: Instance, erased_rows: np.ndarray) -> bool:
    """True iff the erased rows of B are linearly independent."""
    erased_rows = np.asarray(erased_rows, dtype=np.int64)
    if erased_rows.size == 0:
        return True
    if erased_rows.size > inst.n:
        return False
    core = _peel(np.ascontiguousarray(inst.var_of), erased_rows, inst.n)
    if core.size == 0:
        return True
    dense = np.zeros((core.size, inst.n), dtype=np.uint8)
    dense[np.arange(core.size)[:, None], inst.var_of[core]] = 1
    return rows_independent(pack_bits(dense), inst.n)


def exhaustive_recoverable(inst: Instance, erased_rows: np.ndarray) -> bool:
    """Brute-force oracle: count assignments of the erased positions that
    leave the checks B^T d unchanged.  Unique recovery means only zero does."""
    erased_rows = np.asarray(erased_rows, dtype=np.int64)
    e = erased_rows.size
    if e > 24:
        raise ValueError("exhaustive check limited to 24 erased positions")
    if inst.n > 64:
        raise ValueError("exhaustive check limited to n <= 64 variables")
    cols = np.zeros(e, dtype=np.uint64)
    for i, r in enumerate(erased_rows):
        for c in inst.var_of[r]:
            cols[i] ^= np.uint64(1) << np.uint64(int(c))
    # every subset sum of the erased rows, built by doubling
    sums = np.zeros(1, dtype=np.uint64)
    for col in cols:
        sums = np.concatenate([sums, sums ^ col])
    count = int(np.count_nonzero(sums == 0))
    return count == 1


def erased_rows_of(blocks: tuple[np.ndarray, ...], erased_blocks: np.ndarray) -> np.ndarray:
    if len(erased_blocks) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([blocks[i] for i in erased_blocks])


def block_erasure_trials(inst: Instance, erasure_rate: float, trials: int, seed: int) -> list[ErasureTrial]:
    if not 0.0 <= erasure_rate <= 1.0:
        raise ValueError("erasure_rate must lie in [0, 1]")
    blocks = block_partition(inst).blocks
    rng = np.random.Generator(stream(seed, 201))
    out = []
    for _ in range(trials):
        erased = np.flatnonzero(rng.random(len(blocks)) < erasure_rate)
        rows = erased_rows_of(blocks, erased)
        out.append(ErasureTrial(erased, int(rows.size), rows_recoverable(inst, rows)))
    return out


def simulate_block_erasure(inst: Instance, erasure_rate: float, trials: int, seed: int) -> float:
    """Fraction of i.i.d. block-erasure patterns from which the error is recovered."""
    res = block_erasure_trials(inst, erasure_rate, trials, seed)
    return sum(t.recovered for t in res) / trials


def binomial_halfwidth(successes: int, trials: int, confidence: float = 0.95) -> float:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float((ci.high - ci.low) / 2.0)


def _interp_crossing(rates: np.ndarray, probs: np.ndarray, level: float) -> float | None:
    """Rate where the success curve first drops through ``level`` (linear interpolation)."""
    for i in range(len(rates) - 1):
        if probs[i] >= level > probs[i + 1]:
            return float(rates[i] + (probs[i] - level) / (probs[i] - probs[i + 1]) * (rates[i + 1] - rates[i]))
    return None


def threshold_scan(k: int, D: int, b: int, rates: list[float], trials: int, seed: int) -> ThresholdCurve:
    """Recovery probability versus block erasure rate, over fresh instances.

    Every trial draws a new instance and one uniform per block; at rate r the
    blocks with uniform below r are erased.  Patterns are therefore nested in
    r, and since recovery is monotone a binary search over the rate grid
    settles every point with O(log len(rates)) rank checks per trial.
    """
    rates_arr = np.asarray(rates, dtype=np.float64)
    if np.any(np.diff(rates_arr) < 0):
        raise ValueError("rates must be sorted ascending")
    if np.any((rates_arr < 0) | (rates_arr > 1)):
        raise ValueError("rates must lie in [0, 1]")
    R = rates_arr.size
    successes = np.zeros(R, dtype=np.int64)
    for t in range(trials):
        inst = sample_instance(k, D, b, int(stream(seed, 202, t).random_raw()))
        blocks = block_partition(inst).blocks
        u = np.random.Generator(stream(seed, 203, t)).random(b)

        def ok(i: int) -> bool:
            return rows_recoverable(inst, erased_rows_of(blocks, np.flatnonzero(u < rates_arr[i])))

        # largest index that still recovers (-1 if none)
        lo, hi = -1, R
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                lo = mid
            else:
                hi = mid
        successes[: lo + 1] += 1
    probs = successes / trials
    half = [binomial_halfwidth(int(s), trials) for s in successes]
    hi_x = _interp_crossing(rates_arr, probs, 0.9)
    lo_x = _interp_crossing(rates_arr, probs, 0.1)
    width = None if hi_x is None or lo_x is None else lo_x - hi_x
    return ThresholdCurve(
        k=k,
        D=D,
        b=b,
        erasure_rates=[float(r) for r in rates_arr],
        success_probs=[float(p) for p in probs],
        successes=[int(s) for s in successes],
        trials_per_point=trials,
        confidence_halfwidth=half,
        crossing=_interp_crossing(rates_arr, probs, 0.5),
        width=width,
        meta=dict(seed=seed, predicted=theory.e_max(k, D)),
    )


def fgum_outcome_distribution(alpha: float, D: int) -> tuple[float, float]:
    """(success probability, expected satisfied constraints per block)."""
    return theory.p0(alpha, D), theory.block_satisfied(D, alpha)
