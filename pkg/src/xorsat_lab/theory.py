"""Closed-form predictions for D-regular max-k-XORSAT on Gallager's ensemble.

Rational quantities (the mean coset-leader weight and the greedy block score)
are computed exactly with :class:`fractions.Fraction` and converted to float
only at the public boundary.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, exp, pi, sqrt

from scipy.optimize import brentq

# Published comparison values for the grid, used as acceptance targets.  Columns:
# Prange, simulated annealing, DQI+BP, Regev+FGUM, QAOA (p=16).
REFERENCE_TABLE: dict[tuple[int, int], dict[str, float]] = {
    (3, 4): dict(prange=0.875, sa=0.9366, dqi_bp=0.8730, fgum=0.8930, qaoa16=0.8898),
    (3, 5): dict(prange=0.8, sa=0.9005, dqi_bp=0.8176, fgum=0.8379, qaoa16=0.8532),
    (3, 6): dict(prange=0.75, sa=0.8712, dqi_bp=0.7776, fgum=0.7857, qaoa16=0.8231),
    (3, 7): dict(prange=0.71428, sa=0.8492, dqi_bp=0.7476, fgum=0.7621, qaoa16=0.8001),
    (3, 8): dict(prange=0.6875, sa=0.8287, dqi_bp=0.7243, fgum=0.7312, qaoa16=0.7813),
    (4, 5): dict(prange=0.9, sa=0.9279, dqi_bp=0.8605, fgum=0.9216, qaoa16=0.8797),
    (4, 6): dict(prange=0.83333, sa=0.9024, dqi_bp=0.8214, fgum=0.8616, qaoa16=0.8498),
    (4, 7): dict(prange=0.78571, sa=0.8771, dqi_bp=0.7908, fgum=0.8267, qaoa16=0.8259),
    (4, 8): dict(prange=0.75, sa=0.8587, dqi_bp=0.7663, fgum=0.7905, qaoa16=0.8061),
    (5, 6): dict(prange=0.91667, sa=0.9190, dqi_bp=0.8443, fgum=0.9312, qaoa16=0.8669),
    (5, 7): dict(prange=0.85714, sa=0.8965, dqi_bp=0.8140, fgum=0.8853, qaoa16=0.8428),
    (5, 8): dict(prange=0.8125, sa=0.8740, dqi_bp=0.7893, fgum=0.8441, qaoa16=0.8226),
    (6, 7): dict(prange=0.92857, sa=0.9051, dqi_bp=0.8291, fgum=0.9427, qaoa16=0.8546),
    (6, 8): dict(prange=0.875, sa=0.8875, dqi_bp=0.8045, fgum=0.8962, qaoa16=0.8344),
    (7, 8): dict(prange=0.9375, sa=0.8155, dqi_bp=0.8155, fgum=0.9481, qaoa16=0.8432),
}
REFERENCE_GRID: list[tuple[int, int]] = list(REFERENCE_TABLE)

# Large-D QAOA constants nu_14^[k] * sqrt(k/2) at depth 14 (published numerics,
# consumed here as data, not recomputed).
QAOA_NU_SQRT_K_OVER_2: dict[int, float] = {3: 0.7865, 4: 0.8666, 5: 0.9243, 6: 0.9686}

INV_SQRT_2PI = 1.0 / sqrt(2.0 * pi)


def alpha_perp(alpha: float) -> float:
    """Bit-flip rate seen by the dual decoder for output bias ``alpha``."""
    if not 0.0 <= alpha <= 0.5:
        raise ValueError(f"alpha must lie in [0, 1/2], got {alpha}")
    # 1/2 - sqrt(a(1-a)) rewritten to avoid cancellation near a = 1/2
    return (0.5 - alpha) ** 2 / (0.5 + sqrt(alpha * (1.0 - alpha)))


def bp_score_from_threshold(eps_star: float) -> float:
    """Satisfied fraction 1 - alpha for a decoder correcting flip rate ``eps_star``."""
    if not 0.0 <= eps_star <= 0.5:
        raise ValueError(f"eps_star must lie in [0, 1/2], got {eps_star}")
    return 0.5 + sqrt(eps_star * (1.0 - eps_star))


# ---------------------------------------------------------------------------
# coset leaders I_D


@dataclass(frozen=True)
class IDSet:
    D: int
    members: tuple[int, ...]
    j_split: tuple[int, ...]

    def weights(self) -> list[int]:
        return [bin(y).count("1") for y in self.members]


def _word(bits: tuple[int, ...]) -> int:
    # most significant bit first, so (0, ..., 0, 1) is the word 1
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def build_ID(D: int) -> IDSet:
    """Minimum-total-weight set of 2^(D-1) words closed to complement-union.

    Words are integers whose most significant bit is the first coordinate.  For
    even D the balanced words are split by keeping those with a leading 0.
    """
    if D < 2:
        raise ValueError("D must be >= 2")
    top = 1 << (D - 1)
    if D % 2:
        members = [y for y in range(1 << D) if bin(y).count("1") <= (D - 1) // 2]
        j_split: list[int] = []
    else:
        members = [y for y in range(1 << D) if bin(y).count("1") <= D // 2 - 1]
        j_split = [y for y in range(1 << D) if bin(y).count("1") == D // 2 and not y & top]
        members += j_split
    return IDSet(D, tuple(sorted(members)), tuple(j_split))


@lru_cache(maxsize=None)
def i_hat_star_exact(D: int) -> Fraction:
    """Mean Hamming weight of a uniform element of I_D minus the zero word."""
    if D < 2:
        raise ValueError("D must be >= 2")
    if D % 2:
        ws = range(1, (D - 1) // 2 + 1)
        return Fraction(sum(comb(D, w) * w for w in ws), sum(comb(D, w) for w in ws))
    ws = range(1, D // 2)
    half = Fraction(comb(D, D // 2), 2)
    num = sum(comb(D, w) * w for w in ws) + half * (D // 2)
    den = sum(comb(D, w) for w in ws) + half
    return Fraction(num) / den


def i_hat_star(D: int) -> float:
    return float(i_hat_star_exact(D))


@lru_cache(maxsize=None)
def sigma_D_exact(D: int) -> Fraction:
    """Expected satisfied count of a D-block of fair coins after one greedy flip."""
    if D < 1:
        raise ValueError("D must be >= 1")
    return Fraction(sum(comb(D, s) * max(s, D - s) for s in range(D + 1)), 2**D)


def sigma_D(D: int) -> float:
    return float(sigma_D_exact(D))


# ---------------------------------------------------------------------------
# erasure threshold and scores


def p0(alpha: float, D: int) -> float:
    """Success probability of the per-block unambiguous measurement."""
    bound = 1.0 - 2.0 ** (1 - D)
    if alpha < 0 or alpha > bound + 1e-15:
        raise ValueError(f"alpha={alpha} outside [0, 1 - 2^(1-D)] = [0, {bound}]")
    h = 2.0 ** (D - 1)
    return alpha * h / (h - 1.0)


def _emax_residual(e: float, k: int, D: int) -> float:
    return e - e / D - (k - 1) / D * (1.0 - (1.0 - e) ** D)


def e_max(k: int, D: int, step: float = 1e-3, xtol: float = 1e-14) -> float:
    """Largest root in (0, 1) of e = e/D + ((k-1)/D)(1 - (1-e)^D).

    Scans down from e = 1 for the first sign change, then refines by bracketing
    root finding; the scan keeps clear of the trivial root at e = 0.
    """
    if not 2 <= k < D:
        raise ValueError(f"need 2 <= k < D, got k={k}, D={D}")
    hi = 1.0
    if _emax_residual(hi, k, D) <= 0:
        raise ValueError("no nontrivial root")
    lo = hi - step
    while lo > 0 and _emax_residual(lo, k, D) > 0:
        hi, lo = lo, lo - step
    if lo <= 0:
        raise ValueError(f"no nontrivial root for k={k}, D={D}")
    return brentq(_emax_residual, lo, hi, args=(k, D), xtol=xtol, rtol=1e-15)


def alpha_min(k: int, D: int) -> float:
    return (1.0 - e_max(k, D)) * (1.0 - 2.0 ** (1 - D))


def expected_equations(nu: float, k: int, D: int, m: int) -> float:
    """Approximate count of parity checks touching ``nu`` erased bits."""
    n = k * m // D
    return nu / D + (n - m / D) * (1.0 - (1.0 - nu / m) ** D)


def block_satisfied(D: int, alpha: float) -> float:
    """Expected satisfied constraints in one block, D - alpha * mean leader weight."""
    return D - alpha * i_hat_star(D)


def fgum_score(k: int, D: int) -> float:
    e = e_max(k, D)
    return 1.0 - (1.0 - e) * (1.0 - 2.0 ** (1 - D)) * i_hat_star(D) / D


def turbo_prange_score(k: int, D: int, packed_fraction: float | None = None) -> float:
    e = e_max(k, D) if packed_fraction is None else packed_fraction
    return e + sigma_D(D) / D * (1.0 - e)


def prange_score(k: int, D: int) -> float:
    if not k < D:
        raise ValueError("need k < D")
    return (1.0 + k / D) / 2.0


def x_k(k: int, xtol: float = 1e-15) -> float:
    """Positive root of x = (k-1)(1 - exp(-x))."""
    if k < 3:
        raise ValueError("k must be >= 3")
    f = lambda x: x - (k - 1) * (1.0 - exp(-x))  # noqa: E731
    return brentq(f, 1e-6, float(k), xtol=xtol, rtol=1e-15)


def asymptotic_comparison(k: int, D: int, p: int = 14, nu: float | None = None) -> tuple[float, float]:
    """Large-D satisfied fractions (QAOA at depth p, Regev+FGUM).

    ``nu`` is the raw depth-p constant; when omitted, the tabulated depth-14
    value of nu*sqrt(k/2) is used.
    """
    if nu is None:
        if p != 14 or k not in QAOA_NU_SQRT_K_OVER_2:
            raise ValueError("nu must be supplied unless p=14 and 3 <= k <= 6")
        qaoa = 0.5 + QAOA_NU_SQRT_K_OVER_2[k] / sqrt(D - 1)
    else:
        qaoa = 0.5 + nu * sqrt(k / (2.0 * (D - 1)))
    return qaoa, 0.5 + INV_SQRT_2PI / sqrt(D)


@dataclass(frozen=True)
class TheoryReport:
    k: int
    D: int
    e_max: float
    alpha_min: float
    p0: float
    i_hat_star: float
    sigma_D: float
    fgum_score: float
    turbo_prange_score: float
    prange_score: float

    def as_row(self) -> dict:
        return asdict(self)


REPORT_FIELDS = ["k", "D", "e_max", "alpha_min", "p0", "i_hat_star", "sigma_D", "fgum_score",
                 "turbo_prange_score", "prange_score"]


def report(k: int, D: int) -> TheoryReport:
    am = alpha_min(k, D)
    return TheoryReport(
        k=k,
        D=D,
        e_max=e_max(k, D),
        alpha_min=am,
        p0=p0(am, D),
        i_hat_star=i_hat_star(D),
        sigma_D=sigma_D(D),
        fgum_score=fgum_score(k, D),
        turbo_prange_score=turbo_prange_score(k, D),
        prange_score=prange_score(k, D),
    )


def id_axioms_hold(ids: IDSet) -> bool:
    """Exhaustive check of the defining properties of I_D (and J_D for even D)."""
    D = ids.D
    full = (1 << D) - 1
    mem = set(ids.members)
    if len(mem) != 1 << (D - 1):
        return False
    if mem | {y ^ full for y in mem} != set(range(1 << D)):
        return False
    if D % 2 == 0:
        balanced = {y for y in range(1 << D) if bin(y).count("1") == D // 2}
        js = set(ids.j_split)
        if not js <= balanced or len(js) != comb(D, D // 2) // 2:
            return False
        if js | {y ^ full for y in js} != balanced:
            return False
    return True


def brute_force_min_leader_weight(D: int) -> int:
    """Minimum total weight over all valid I_D, by choosing one word per complement pair."""
    if D > 5:
        raise ValueError("exhaustive search is limited to D <= 5")
    full = (1 << D) - 1
    pairs = [(y, y ^ full) for y in range(1 << D) if y < y ^ full]
    best = None
    for choice in itertools.product((0, 1), repeat=len(pairs)):
        w = sum(bin(p[c]).count("1") for p, c in zip(pairs, choice))
        best = w if best is None else min(best, w)
    return best
