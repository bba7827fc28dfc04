from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from xorsat_lab.gf2 import GF2Matrix, GF2Vector
from xorsat_lab.regev import (
    BiasFunction,
    DecoderSpec,
    ReductionAllShifts,
    code_pair,
    hadamard,
    interpolated_decoder,
    measure_epsilon,
    objective_diag,
    p_alpha,
    perfect_decoder,
    random_code,
    random_decoder,
    random_unique_decodable_bias,
    run_reduction,
    run_reduction_full,
    verify_distance_bounds,
    verify_error_bound,
    zero_decoder,
)


def weight(x: int) -> int:
    return bin(x).count("1")


def target_by_definition(code, P, v):
    """|P(c - v)|^2 over codewords c = Bx, normalized, built from the generator matrix."""
    m = code.m
    dense = code.B.to_dense()
    out = np.zeros(1 << m)
    for x in range(1 << code.B.cols):
        bits = np.array([(x >> j) & 1 for j in range(code.B.cols)])
        c = dense @ bits % 2
        ci = int(sum(int(b) << i for i, b in enumerate(c)))
        out[ci] = abs(P.values[ci ^ v]) ** 2
    return out / out.sum()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6).flatmap(lambda m: arrays(np.float64, 1 << m, elements=st.floats(-1, 1))))
def test_hadamard_is_self_inverse(vec):
    assert np.allclose(hadamard(hadamard(vec)), vec, atol=1e-12)


def test_code_pair_and_validation():
    code = code_pair(GF2Matrix.from_dense([[1], [1]]))
    assert code.C.tolist() == [0, 3] and code.C_perp.tolist() == [0, 3]
    with pytest.raises(ValueError):
        code_pair(GF2Matrix.from_dense([[1, 1], [1, 1]]))  # rank deficient
    with pytest.raises(ValueError):
        code_pair(GF2Matrix.from_dense(np.eye(7, dtype=np.uint8)[:, :2]))
    with pytest.raises(ValueError):
        BiasFunction(np.ones(4))  # not normalized
    bad = np.ones((4, 4, 4), dtype=complex)
    with pytest.raises(ValueError):
        DecoderSpec(2, 0, bad)


def test_repetition_code_uniform_bias():
    B = GF2Matrix.from_dense([[1], [1]])
    P = BiasFunction(np.full(4, 0.5, dtype=complex))
    dec = perfect_decoder(code_pair(B), P)
    for v in range(4):
        dist, ps = run_reduction(B, GF2Vector.from_bits([(v >> i) & 1 for i in range(2)]), P, dec)
        assert np.allclose(dist, [0.5, 0, 0, 0.5], atol=1e-12)
        assert ps == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("mn", [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3)])
def test_perfect_decoding_reproduces_target_distribution(mn):
    rng = np.random.default_rng(sum(mn))
    code = random_code(*mn, rng)
    P = random_unique_decodable_bias(code, rng)
    dec = perfect_decoder(code, P)
    eps, per = measure_epsilon(code, P, dec)
    assert eps < 1e-12 and np.all(per < 1e-12)
    red = ReductionAllShifts(code, P, dec)
    for v in range(1 << code.m):
        d_actual, d_algo = red.distributions(v)
        target = target_by_definition(code, P, v)
        assert np.max(np.abs(d_algo - target)) < 1e-10
        assert np.max(np.abs(d_actual - target)) < 1e-10  # supported on C without conditioning
    full = run_reduction_full(code, (1 << code.m) - 1, P, dec)
    assert np.max(np.abs(full.algo_distribution - target_by_definition(code, P, (1 << code.m) - 1))) < 1e-10
    eb = verify_error_bound(code, P, dec)
    assert eb.lhs == pytest.approx(eb.details["s_h_s"], abs=1e-10)
    db = verify_distance_bounds(code, P, dec)
    assert db.details["trace_distance"] < 1e-7 and db.details["tv_algo_actual"] < 1e-10


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("alpha", [0.05, 0.2, 0.4])
def test_p_alpha_on_square_codes_is_exact(m, alpha):
    # with B invertible the dual code is {0}, lookup decoding is perfect and
    # the expected score is exactly 1 - alpha
    rng = np.random.default_rng(m)
    code = random_code(m, m, rng)
    P = p_alpha(m, alpha)
    dec = perfect_decoder(code, P)
    eb = verify_error_bound(code, P, dec)
    assert eb.eps < 1e-12
    assert eb.lhs == pytest.approx(1 - alpha, abs=1e-10)


@pytest.mark.parametrize("mn", [(2, 1), (4, 2), (6, 3)])
def test_p_alpha_weighted_identity_on_general_codes(mn):
    # for a nontrivial dual code the normalization-weighted ideal score is 1 - alpha
    rng = np.random.default_rng(10 + mn[0])
    code = random_code(*mn, rng)
    P = p_alpha(mn[0], 0.2)
    eb = verify_error_bound(code, P, perfect_decoder(code, P))
    assert eb.details["weighted_target_score"] == pytest.approx(0.8, abs=1e-10)
    assert eb.details["s_h_s"] == pytest.approx(0.8, abs=1e-12)
    assert eb.holds


def test_p_alpha_expectation():
    for m in (1, 3, 6):
        assert p_alpha(m, 0.3).expectation(objective_diag(m)) == pytest.approx(0.7, abs=1e-12)


def test_zero_decoder_closed_form():
    B = GF2Matrix.from_dense([[1], [1]])
    code = code_pair(B)
    rng = np.random.default_rng(3)
    amp = rng.normal(size=4) + 1j * rng.normal(size=4)
    P = BiasFunction(amp / np.linalg.norm(amp))
    dec = zero_decoder(2)
    eps, per = measure_epsilon(code, P, dec)
    # the output register stays 0, so decoding succeeds exactly on d = 0
    assert per.tolist() == pytest.approx([0.0, 1.0], abs=1e-12)
    assert eps == pytest.approx(0.5, abs=1e-12)
    for v in range(4):
        run = run_reduction_full(code, v, P, dec)
        assert run.postselect_prob == pytest.approx(0.5, abs=1e-12)
        # only the d = 0 branch survives, leaving |P(x + v)|^2 before conditioning on C
        expect = np.abs(P.values[np.arange(4) ^ v]) ** 2
        assert np.allclose(run.actual_distribution, expect, atol=1e-12)
        assert run.algo_distribution.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("mn,g", [((2, 1), 0), ((4, 2), 1), ((4, 1), 0), ((6, 3), 1)])
def test_epsilon_is_postselection_failure_and_lemma(mn, g):
    rng = np.random.default_rng(20 + mn[0] + g)
    code = random_code(*mn, rng)
    P = p_alpha(mn[0], 0.15)
    dec = random_decoder(code, P, rng, g=g)
    eps, _ = measure_epsilon(code, P, dec)
    run = run_reduction_full(code, int(rng.integers(1 << mn[0])), P, dec)
    assert 1 - run.postselect_prob == pytest.approx(eps, abs=1e-10)
    assert run.n_dec == pytest.approx(1 / np.sqrt(code.C_perp.size * (1 - eps)), abs=1e-10)
    assert len(run.norm_log) == 9
    assert all(abs(n - 1) < 1e-12 for _, n in run.norm_log)


def test_fast_path_matches_literal_steps():
    rng = np.random.default_rng(4)
    code = random_code(4, 2, rng)
    P = p_alpha(4, 0.25)
    dec = random_decoder(code, P, rng, g=1)
    red = ReductionAllShifts(code, P, dec)
    for v in (0, 5, 15):
        run = run_reduction_full(code, v, P, dec)
        d_actual, d_algo = red.distributions(v)
        assert np.allclose(run.actual_distribution, d_actual, atol=1e-12)
        assert np.allclose(run.algo_distribution, d_algo, atol=1e-12)
        assert np.allclose(run.phi_actual, red.phi_actual(v), atol=1e-12)


def test_interpolated_decoder_endpoints():
    rng = np.random.default_rng(5)
    code = random_code(4, 2, rng)
    P = random_unique_decodable_bias(code, rng)
    assert measure_epsilon(code, P, interpolated_decoder(code, P, 1.0))[0] < 1e-12
    eps0, _ = measure_epsilon(code, P, interpolated_decoder(code, P, 0.0))
    assert eps0 == pytest.approx(1 - 1 / code.C_perp.size, abs=1e-12)


def test_synthetic_decoder_with_small_epsilon():
    rng = np.random.default_rng(6)
    code = random_code(4, 2, rng)
    P = random_unique_decodable_bias(code, rng)
    theta = brentq(lambda t: measure_epsilon(code, P, interpolated_decoder(code, P, t))[0] - 0.04, 0.3, 1.0)
    dec = interpolated_decoder(code, P, theta)
    eb = verify_error_bound(code, P, dec)
    db = verify_distance_bounds(code, P, dec)
    assert eb.eps == pytest.approx(0.04, abs=1e-9)
    assert eb.holds and eb.slack >= 0
    assert db.holds and db.details["trace_distance"] <= 0.2
    assert db.details["tv_below_trace_every_v"]


@pytest.mark.parametrize("trial", range(6))
def test_bounds_on_random_decoders(trial):
    rng = np.random.default_rng(100 + trial)
    m = (2, 4, 6)[trial % 3]
    code = random_code(m, max(1, m // 2), rng)
    P = p_alpha(m, float(rng.uniform(0.05, 0.45))) if trial % 2 else random_unique_decodable_bias(code, rng)
    dec = random_decoder(code, P, rng, g=1 if m < 6 else 0)
    assert verify_error_bound(code, P, dec).holds
    assert verify_distance_bounds(code, P, dec).holds


def test_objective_validation():
    rng = np.random.default_rng(7)
    code = random_code(2, 1, rng)
    P = p_alpha(2, 0.1)
    with pytest.raises(ValueError):
        verify_error_bound(code, P, perfect_decoder(code, P), H_obj=np.array([0.0, 2.0, 0.0, 0.0]))
    custom = np.array([1.0, 0.3, 0.3, 0.0])
    assert verify_error_bound(code, P, perfect_decoder(code, P), H_obj=custom).holds
