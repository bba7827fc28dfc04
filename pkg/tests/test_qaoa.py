from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from xorsat_lab.qaoa import (
    QaoaParams,
    build_lightcone,
    interpolate_params,
    lightcone_size,
    lightcone_statevector_energy,
    optimize,
    statevector_energy,
    tree_energy,
)

angles = st.floats(-3.0, 3.0, allow_nan=False)


def params_of(p, rng):
    return QaoaParams.from_vector(rng.uniform(-math.pi, math.pi, 2 * p))


def test_params_validation():
    with pytest.raises(ValueError):
        QaoaParams((0.1,), (0.1, 0.2))
    with pytest.raises(ValueError):
        QaoaParams((), ())
    with pytest.raises(ValueError):
        QaoaParams((math.nan,), (0.0,))
    p = QaoaParams.from_vector([1, 2, 3, 4])
    assert p.gammas == (1, 2) and p.betas == (3, 4) and p.p == 2


@pytest.mark.parametrize("kd", [(2, 3), (3, 4), (3, 6), (7, 8)])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_zero_angles_give_one_half(kd, p):
    assert tree_energy(*kd, QaoaParams((0.0,) * p, (0.0,) * p)) == pytest.approx(0.5, abs=1e-14)


def test_zero_angles_statevector():
    assert lightcone_statevector_energy(3, 4, QaoaParams((0.0,), (0.0,))) == pytest.approx(0.5, abs=1e-14)


def test_lightcone_sizes_and_structure():
    assert lightcone_size(3, 4, 1) == 21
    assert lightcone_size(3, 5, 1, merge_leaves=True) == 15
    g = build_lightcone(3, 4, 2)
    assert g.n_qubits == lightcone_size(3, 4, 2)
    deg = np.zeros(g.n_qubits, dtype=int)
    for c in g.constraints:
        assert len(c) == 3
        deg[list(c)] += 1
    interior = [q for q, d in g.depth.items() if d < 2]
    assert all(deg[q] == 4 for q in interior)
    # tree: (qubits + constraints) - 1 edges
    assert sum(len(c) for c in g.constraints) == g.n_qubits + len(g.constraints) - 1


@pytest.mark.parametrize("kd", [(2, 3), (2, 4), (3, 3)])
def test_tree_matches_statevector_small(kd):
    rng = np.random.default_rng(5)
    for _ in range(5):
        pr = params_of(1, rng)
        assert tree_energy(*kd, pr) == pytest.approx(lightcone_statevector_energy(*kd, pr), abs=1e-9)


def test_tree_matches_statevector_depth_two():
    rng = np.random.default_rng(6)
    kd = (2, 3)  # 14-qubit cone; the (2, 4) cone already has 26 qubits at p = 2
    for _ in range(3):
        pr = params_of(2, rng)
        full = lightcone_statevector_energy(*kd, pr, merge_leaves=False)
        merged = lightcone_statevector_energy(*kd, pr, merge_leaves=True)
        assert tree_energy(*kd, pr) == pytest.approx(full, abs=1e-9)
        assert merged == pytest.approx(full, abs=1e-12)


def test_leaf_merging_is_exact():
    rng = np.random.default_rng(7)
    pr = params_of(1, rng)
    full = lightcone_statevector_energy(3, 3, pr, merge_leaves=False)
    assert lightcone_statevector_energy(3, 3, pr, merge_leaves=True) == pytest.approx(full, abs=1e-12)


def test_relabeling_invariance():
    rng = np.random.default_rng(8)
    g = build_lightcone(2, 3, 2)
    pr = params_of(2, rng)
    perm = rng.permutation(g.n_qubits)
    assert statevector_energy(g.relabeled(perm), pr) == pytest.approx(statevector_energy(g, pr), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(angles, min_size=4, max_size=4), st.integers(0, 3), st.sampled_from([(3, 4), (3, 6), (5, 7)]))
def test_periodicity(vec, which, kd):
    pr = QaoaParams.from_vector(vec)
    shifted = np.array(vec)
    shifted[which] += math.pi
    assert tree_energy(*kd, QaoaParams.from_vector(shifted)) == pytest.approx(tree_energy(*kd, pr), abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.lists(angles, min_size=4, max_size=4), st.sampled_from([(3, 4), (4, 6)]))
def test_time_reversal_symmetry(vec, kd):
    # negating every angle conjugates the amplitudes and leaves the energy unchanged
    pr = QaoaParams.from_vector(vec)
    neg = QaoaParams.from_vector(-np.array(vec))
    assert tree_energy(*kd, neg) == pytest.approx(tree_energy(*kd, pr), abs=1e-12)


def test_energy_in_unit_interval():
    rng = np.random.default_rng(9)
    for p in (1, 2, 3, 4):
        e = tree_energy(3, 6, params_of(p, rng))
        assert 0.0 <= e <= 1.0


def test_depth_budget():
    with pytest.raises(ValueError):
        tree_energy(3, 4, QaoaParams((0.1,) * 3, (0.1,) * 3), max_p=2)
    with pytest.raises(ValueError):
        lightcone_statevector_energy(3, 6, QaoaParams((0.1,) * 2, (0.1,) * 2))


def test_k2_d3_optimum():
    res = optimize(2, 3, 1, restarts=5, seed=0)
    assert res.satisfied_fraction == pytest.approx(0.6924, abs=1e-3)
    assert lightcone_statevector_energy(2, 3, res.params) == pytest.approx(res.satisfied_fraction, abs=1e-9)


def test_p1_optimum_against_grid_search_oracle():
    # oracle: dense grid on the tree value, refined on the exact (leaf-merged) light cone
    k, D = 3, 6
    gs = np.linspace(0, math.pi, 121)
    grid = np.array([[tree_energy(k, D, QaoaParams((g,), (b,))) for b in gs] for g in gs])
    i, j = np.unravel_index(np.argmax(grid), grid.shape)
    ref = minimize(lambda x: -lightcone_statevector_energy(k, D, QaoaParams((x[0],), (x[1],))),
                   [gs[i], gs[j]], method="Nelder-Mead", options=dict(xatol=1e-9, fatol=1e-13))
    res = optimize(k, D, 1, restarts=10, seed=1)
    assert res.satisfied_fraction == pytest.approx(-ref.fun, abs=1e-6)


def test_optimize_is_deterministic_and_monotone_in_restarts():
    a = optimize(3, 4, 1, restarts=2, seed=3)
    b = optimize(3, 4, 1, restarts=2, seed=3)
    c = optimize(3, 4, 1, restarts=6, seed=3)
    assert a.satisfied_fraction == b.satisfied_fraction and a.params == b.params
    assert c.satisfied_fraction >= a.satisfied_fraction - 1e-12


def test_interpolation_preserves_endpoints():
    p = QaoaParams((0.1, 0.3), (0.5, 0.2))
    q = interpolate_params(p)
    assert q.p == 3
    assert q.gammas[0] == pytest.approx(0.1) and q.gammas[-1] == pytest.approx(0.3)


def test_warm_start_continues_history():
    first = optimize(3, 6, 2, restarts=3, seed=0)
    more = optimize(3, 6, 3, restarts=3, seed=0, warm=first.params)
    assert [d for d, _ in more.history] == [2, 3]
    assert more.satisfied_fraction >= first.satisfied_fraction - 1e-12
