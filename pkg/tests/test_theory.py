from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, exp, pi, sqrt

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xorsat_lab import theory as T


def test_alpha_perp_examples():
    assert T.alpha_perp(0.0) == 0.5
    assert T.alpha_perp(0.5) == pytest.approx(0.0, abs=1e-15)
    assert T.alpha_perp(0.1) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ValueError):
        T.alpha_perp(0.6)


@given(st.floats(0.0, 0.5))
def test_alpha_perp_inverts_bp_score(alpha):
    assert T.bp_score_from_threshold(T.alpha_perp(alpha)) == pytest.approx(1 - alpha, abs=1e-12)


def test_bp_score_examples():
    assert T.bp_score_from_threshold(0.0) == 0.5
    assert T.bp_score_from_threshold(0.5) == 1.0
    assert T.bp_score_from_threshold(0.0841) == pytest.approx(0.7776, abs=2e-4)
    with pytest.raises(ValueError):
        T.bp_score_from_threshold(-0.1)


def _bits(y: int, D: int) -> str:
    return format(y, f"0{D}b")


def test_build_ID_examples():
    assert [_bits(y, 3) for y in T.build_ID(3).members] == ["000", "001", "010", "100"]
    assert [_bits(y, 2) for y in T.build_ID(2).members] == ["00", "01"]
    ids = T.build_ID(4)
    assert len(ids.members) == 8
    assert sum(bin(y).count("1") <= 1 for y in ids.members) == 5
    assert len(ids.j_split) == 3 and T.id_axioms_hold(ids)


@pytest.mark.parametrize("D", range(2, 13))
def test_ID_axioms(D):
    assert T.id_axioms_hold(T.build_ID(D))


@pytest.mark.parametrize("D", range(2, 9))
def test_ID_has_minimal_total_weight(D):
    # the objective separates over complement pairs, so the exhaustive minimum
    # is the sum of per-pair minima; for D <= 5 the full product is also searched
    full = (1 << D) - 1
    pairs = [(y, y ^ full) for y in range(1 << D) if y < y ^ full]
    per_pair = sum(min(bin(a).count("1"), bin(b).count("1")) for a, b in pairs)
    assert sum(T.build_ID(D).weights()) == per_pair
    if D <= 5:
        assert T.brute_force_min_leader_weight(D) == per_pair


@pytest.mark.parametrize("D", range(2, 11))
def test_i_hat_star_matches_enumeration(D):
    w = [bin(y).count("1") for y in T.build_ID(D).members if y]
    assert T.i_hat_star_exact(D) == Fraction(sum(w), len(w))


def test_i_hat_star_examples():
    assert T.i_hat_star(3) == 1.0
    assert T.i_hat_star_exact(4) == Fraction(10, 7)
    assert T.i_hat_star_exact(6) == Fraction(66, 31)


@pytest.mark.parametrize("D", range(1, 13))
def test_sigma_matches_enumeration(D):
    total = sum(max(bin(y).count("1"), D - bin(y).count("1")) for y in range(1 << D))
    assert T.sigma_D_exact(D) == Fraction(total, 2**D)


def test_sigma_examples():
    assert T.sigma_D(3) == 2.25
    assert T.sigma_D(4) == 2.75
    assert T.sigma_D(8) == 5.09375


@pytest.mark.parametrize("D", range(2, 25))
def test_sigma_identity_exact(D):
    assert T.sigma_D_exact(D) == D + (Fraction(2) ** (1 - D) - 1) * T.i_hat_star_exact(D)


def test_sigma_asymptotics():
    D = 256
    assert (T.sigma_D(D) / D - 0.5) * sqrt(D) == pytest.approx(1 / sqrt(2 * pi), rel=0.02)


def test_p0_examples():
    assert T.p0(0.0, 5) == 0.0
    assert T.p0(0.5, 3) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        T.p0(0.8, 3)
    assert T.p0(T.alpha_min(3, 6), 6) == pytest.approx(0.6235, abs=1e-3)


@pytest.mark.parametrize("kd", T.REFERENCE_GRID)
def test_e_max_against_high_precision_root(kd):
    k, D = kd
    g = lambda e: e - e / D - mpmath.mpf(k - 1) / D * (1 - (1 - e) ** D)  # noqa: E731
    ref = mpmath.findroot(g, T.e_max(k, D), tol=1e-30)
    assert abs(T.e_max(k, D) - float(ref)) < 1e-12
    # and it is the largest root: g stays positive above it
    assert all(g(mpmath.mpf(x) / 1000) > 0 for x in range(int(T.e_max(k, D) * 1000) + 1, 1001))


def test_e_max_examples():
    assert T.e_max(3, 6) == pytest.approx(0.3766, abs=2e-4)
    assert T.e_max(3, 4) == pytest.approx(0.6576, abs=2e-4)
    assert T.e_max(7, 8) == pytest.approx(0.8570, abs=2e-4)
    with pytest.raises(ValueError):
        T.e_max(6, 6)


@pytest.mark.parametrize("kd", T.REFERENCE_GRID)
def test_table1_theory_columns(kd):
    k, D = kd
    row = T.REFERENCE_TABLE[kd]
    assert abs(T.fgum_score(k, D) - row["fgum"]) <= 5e-4
    assert abs(T.turbo_prange_score(k, D) - row["fgum"]) <= 5e-4
    # the Prange column is printed with up to five digits, mostly rounded but
    # truncated in the (3,7) row (0.714285... printed as 0.71428)
    printed = row["prange"]
    digits = len(repr(printed).split(".")[1])
    exact = T.prange_score(k, D)
    truncated = int(exact * 10**digits) / 10**digits
    assert printed in (round(exact, digits), truncated)


@pytest.mark.parametrize("kd", T.REFERENCE_GRID)
def test_score_identities(kd):
    k, D = kd
    assert abs(T.turbo_prange_score(k, D) - T.fgum_score(k, D)) < 1e-12
    assert abs(T.p0(T.alpha_min(k, D), D) - (1 - T.e_max(k, D))) < 1e-12


@given(st.floats(0.0, 1.0))
def test_turbo_fgum_identity_is_independent_of_e(e):
    for D in (4, 6, 8):
        fgum = 1 - (1 - e) * (1 - 2.0 ** (1 - D)) * T.i_hat_star(D) / D
        assert T.turbo_prange_score(3, D, packed_fraction=e) == pytest.approx(fgum, abs=1e-12)


def test_x_k():
    x = T.x_k(3)
    assert x == pytest.approx(1.5936, abs=1e-4)
    assert abs(2 * (1 - exp(-x)) - x) < 1e-12
    x50 = T.x_k(50)
    assert abs(x50 / 49 - (1 - exp(-x50))) < 1e-6
    assert abs(T.e_max(3, 200) * 200 - x) <= 0.05


def test_asymptotic_comparison():
    q, f = T.asymptotic_comparison(3, 10)
    assert q == pytest.approx(0.5 + 0.7865 / 3)
    assert f == pytest.approx(0.5 + 0.3989 / sqrt(10), abs=1e-4)
    for k in (3, 4, 5, 6):
        q, f = T.asymptotic_comparison(k, 10_000)
        assert q > f
    q, _ = T.asymptotic_comparison(3, 11, p=5, nu=0.5)
    assert q == pytest.approx(0.5 + 0.5 * sqrt(3 / 20))
    with pytest.raises(ValueError):
        T.asymptotic_comparison(7, 10)


def test_report_row_fields():
    rep = T.report(3, 6).as_row()
    assert list(rep) == T.REPORT_FIELDS
    assert 0 < rep["e_max"] < 1 and 0 < rep["p0"] <= 1
