"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest -v tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed as it finishes and repeated in the terminal summary.
The full 15-row density-evolution grid takes hours and only runs when
``XORSAT_LAB_FULL=1``; the three-row subset is the default gate.
"""

from __future__ import annotations

import os
import time
from fractions import Fraction

import numpy as np
import pytest

from _report import report
from xorsat_lab import bp, ensemble, fgum, qaoa, solvers, theory
from xorsat_lab.harness import ExperimentConfig, verb_cycle_audit
from xorsat_lab.regev import (
    ReductionAllShifts,
    measure_epsilon,
    p_alpha,
    perfect_decoder,
    random_code,
    random_decoder,
    random_unique_decodable_bias,
    verify_distance_bounds,
    verify_error_bound,
)
from xorsat_lab.rng import stream

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

FULL = os.environ.get("XORSAT_LAB_FULL") == "1"
GRID = list(theory.REFERENCE_TABLE)
N_VARS = 2520
EMPIRICAL_ROWS = [(3, 6), (4, 6), (7, 8)]
SA_CI_FLOOR = 0.925  # frozen from a pilot of the 10^4-sweep variant


def printed(x: float, digits: int) -> set[float]:
    """Values a table could print for x: rounded or truncated to ``digits``."""
    scale = 10**digits
    return {round(x, digits), int(x * scale) / scale}


def test_criterion_01_theory_columns():
    t0 = time.perf_counter()
    worst_fgum, worst_turbo, prange_ok = 0.0, 0.0, True
    for kd in GRID:
        ref = theory.REFERENCE_TABLE[kd]
        worst_fgum = max(worst_fgum, abs(theory.fgum_score(*kd) - ref["fgum"]))
        worst_turbo = max(worst_turbo, abs(theory.turbo_prange_score(*kd) - ref["fgum"]))
        digits = len(repr(ref["prange"]).split(".")[1])
        prange_ok &= ref["prange"] in printed(theory.prange_score(*kd), digits)
    dt = time.perf_counter() - t0
    ok = worst_fgum <= 5e-4 and worst_turbo <= 5e-4 and prange_ok and dt < 1.0
    assert report("1 theory columns", ok,
                  f"max|fgum-ref|={worst_fgum:.2e} max|turbo-ref|={worst_turbo:.2e} prange_exact={prange_ok} "
                  f"t={dt:.2f}s")


def test_criterion_02_identities():
    t0 = time.perf_counter()
    sigma_ok = all(
        theory.sigma_D_exact(D) == D + (Fraction(2) ** (1 - D) - 1) * theory.i_hat_star_exact(D)
        for D in range(2, 25)
    )
    turbo = max(abs(theory.turbo_prange_score(*kd) - theory.fgum_score(*kd)) for kd in GRID)
    p0_err = max(abs(theory.p0(theory.alpha_min(k, D), D) - (1 - theory.e_max(k, D))) for k, D in GRID)
    dt = time.perf_counter() - t0
    ok = sigma_ok and turbo <= 1e-12 and p0_err <= 1e-12 and dt < 1.0
    assert report("2 identity suite", ok,
                  f"sigma_exact={sigma_ok} turbo-fgum={turbo:.1e} p0-(1-e_max)={p0_err:.1e} t={dt:.2f}s")


def _mean_score(kd, solver):
    k, D = kd
    scores = []
    for s in range(20):
        inst = ensemble.sample_instance(k, D, N_VARS // k, int(stream(0, 901, k, D, s).random_raw()))
        scores.append(solver(inst, s).score)
    return float(np.mean(scores))


def test_criterion_03_turbo_prange_empirical():
    diffs = {kd: _mean_score(kd, solvers.turbo_prange) - theory.REFERENCE_TABLE[kd]["fgum"] for kd in EMPIRICAL_ROWS}
    ok = all(abs(d) <= 5e-3 for d in diffs.values())
    assert report("3 turbo prange empirical", ok, " ".join(f"{kd}:{d:+.4f}" for kd, d in diffs.items()))


def test_criterion_04_prange_empirical():
    diffs = {kd: _mean_score(kd, solvers.prange) - (1 + kd[0] / kd[1]) / 2 for kd in EMPIRICAL_ROWS}
    ok = all(abs(d) <= 1e-2 for d in diffs.values())
    assert report("4 prange empirical", ok, " ".join(f"{kd}:{d:+.4f}" for kd, d in diffs.items()))


@pytest.mark.parametrize("kd", [(3, 6), (7, 8)])
def test_criterion_05_fgum_threshold(kd):
    k, D = kd
    e = theory.e_max(k, D)
    rates = sorted({min(1.0, e * f) for f in (0.9, 0.94, 0.97, 0.99, 1.0, 1.01, 1.03, 1.06, 1.1)})
    curve = fgum.threshold_scan(k, D, 2000, rates, trials=40, seed=0)
    below = curve.success_probs[0]
    above = curve.success_probs[-1]
    ok = (curve.crossing is not None and abs(curve.crossing - e) <= 0.015 and below >= 0.99 and above <= 0.1)
    assert report(f"5 fgum threshold {kd}", ok,
                  f"crossing={curve.crossing} e_max={e:.5f} P(0.9e)={below:.3f} P(1.1e)={above:.3f}")


def _de_rows(rows):
    cfg = bp.DEConfig(population_size=100_000, seed=0)
    return {kd: bp.dqi_bp_score(*kd, cfg) - theory.REFERENCE_TABLE[kd]["dqi_bp"] for kd in rows}


def test_criterion_06_density_evolution_gate():
    t0 = time.perf_counter()
    diffs = _de_rows([(3, 4), (3, 6), (7, 8)])
    dt = time.perf_counter() - t0
    ok = all(abs(d) <= 5e-3 for d in diffs.values())
    assert report("6 density evolution (3-row gate)", ok,
                  " ".join(f"{kd}:{d:+.4f}" for kd, d in diffs.items()) + f" t={dt / 60:.1f}min")


@pytest.mark.skipif(not FULL, reason="full 15-row grid takes hours; set XORSAT_LAB_FULL=1")
def test_criterion_06_density_evolution_full_grid():
    diffs = _de_rows(GRID)
    ok = all(abs(d) <= 5e-3 for d in diffs.values())
    assert report("6 density evolution (full grid)", ok, f"max|diff|={max(map(abs, diffs.values())):.4f}")


def test_criterion_07_qaoa():
    rng = np.random.default_rng(7)
    worst = 0.0
    for kd in [(3, 4), (3, 5)]:
        for _ in range(50):
            pr = qaoa.QaoaParams.from_vector(rng.uniform(-np.pi, np.pi, 2))
            worst = max(worst, abs(qaoa.tree_energy(*kd, pr) - qaoa.lightcone_statevector_energy(*kd, pr)))
    res = qaoa.optimize(3, 6, 6, restarts=10, seed=0)
    vals = [v for _, v in res.history]
    monotone = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:])) and len(vals) == 6
    ok = worst <= 1e-9 and monotone
    assert report("7 qaoa oracle and monotonicity", ok,
                  f"max|tree-statevector|={worst:.1e} history={[round(v, 5) for v in vals]}")


def _sa_best(sweeps):
    inst = ensemble.sample_instance(3, 4, N_VARS // 3, 0)
    return solvers.simulated_annealing(inst, solvers.SAConfig(sweeps=sweeps, seeds=4, seed=0)).score


def test_criterion_08_simulated_annealing_ci():
    score = _sa_best(10_000)
    assert report("8 simulated annealing (10^4 sweeps)", score >= SA_CI_FLOOR,
                  f"best of 4 = {score:.4f} (floor {SA_CI_FLOOR})")


def test_criterion_08_simulated_annealing_full():
    score = _sa_best(1_000_000)
    assert report("8 simulated annealing (10^6 sweeps)", score >= 0.930, f"best of 4 = {score:.4f} (>= 0.930)")


def test_criterion_09_regev_verifier():
    t0 = time.perf_counter()
    # exact decoding reproduces the target distribution
    exact_err = 0.0
    for m, n in [(2, 1), (4, 2), (6, 3)]:
        rng = np.random.default_rng(m)
        code = random_code(m, n, rng)
        P = random_unique_decodable_bias(code, rng)
        red = ReductionAllShifts(code, P, perfect_decoder(code, P))
        assert red.eps_per_codeword.max() < 1e-12
        for v in range(1 << m):
            exact_err = max(exact_err, float(np.max(np.abs(red.distributions(v)[1] - red.target_distribution(v)))))
    # randomized imperfect decoders
    held, total = 0, 0
    for trial in range(24):
        rng = np.random.default_rng(1000 + trial)
        m = (2, 4, 6)[trial % 3]
        code = random_code(m, int(rng.integers(1, m)), rng)
        P = p_alpha(m, float(rng.uniform(0.05, 0.45))) if trial % 2 else random_unique_decodable_bias(code, rng)
        dec = random_decoder(code, P, rng, g=int(rng.integers(0, 2)))
        eps, _ = measure_epsilon(code, P, dec)
        total += 1
        held += verify_error_bound(code, P, dec).holds and verify_distance_bounds(code, P, dec).holds and eps > 1e-6
    # P_alpha: invertible B leaves only the zero dual codeword
    alpha_err = 0.0
    for m in (2, 4, 6):
        rng = np.random.default_rng(50 + m)
        code = random_code(m, m, rng)
        P = p_alpha(m, 0.2)
        alpha_err = max(alpha_err, abs(verify_error_bound(code, P, perfect_decoder(code, P)).lhs - 0.8))
    dt = time.perf_counter() - t0
    ok = exact_err <= 1e-10 and held == total >= 20 and alpha_err <= 1e-10 and dt < 600
    assert report("9 regev verifier", ok,
                  f"eps=0 max err={exact_err:.1e} bounds held {held}/{total} |score-(1-alpha)|={alpha_err:.1e} "
                  f"t={dt:.0f}s")


def test_criterion_10_ensemble_audit():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(verb="cycle-audit", grid=[(3, 6)], b=50, options=dict(samples=1000))
    rows, _ = verb_cycle_audit(cfg)
    dt = time.perf_counter() - t0
    ok = all(r["regular"] and r["partition_ok"] and r["mean_cycles"] <= r["bound"] for r in rows) and dt < 300
    assert report("10 ensemble audit", ok,
                  " ".join(f"E[N_{r['ell']}]={r['mean_cycles']:.2f}<= {r['bound']:.0f}" for r in rows)
                  + f" samples=1000 t={dt:.0f}s")


if __name__ == "__main__":
    raise SystemExit(pytest.main(["-v", __file__]))
