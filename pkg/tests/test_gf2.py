from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xorsat_lab.gf2 import (
    GF2Matrix,
    GF2Vector,
    RowBasis,
    column_submatrix_full_rank,
    mat_vec,
    nullspace,
    pack_bits,
    rank,
    rows_independent,
    solve,
    unpack_bits,
)

from _oracles import brute_solutions, rank_int_rows


def dense_matrices(max_rows=10, max_cols=140):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: arrays(np.uint8, s, elements=st.integers(0, 1))
    )


@given(arrays(np.uint8, st.integers(0, 300), elements=st.integers(0, 1)))
def test_pack_roundtrip(bits):
    packed = pack_bits(bits)
    assert np.array_equal(unpack_bits(packed, bits.size), bits)


@settings(max_examples=200, deadline=None)
@given(dense_matrices())
def test_rank_matches_integer_elimination(dense):
    M = GF2Matrix.from_dense(dense)
    assert rank(M) == rank_int_rows(dense)


@settings(max_examples=100, deadline=None)
@given(dense_matrices(max_cols=70))
def test_rank_of_transpose(dense):
    M = GF2Matrix.from_dense(dense)
    assert rank(M) == rank(M.T)


@settings(max_examples=100, deadline=None)
@given(dense_matrices(max_rows=8, max_cols=90))
def test_rows_independent_iff_full_row_rank(dense):
    M = GF2Matrix.from_dense(dense)
    assert rows_independent(M.data, M.cols) == (rank_int_rows(dense) == dense.shape[0])


@settings(max_examples=100, deadline=None)
@given(dense_matrices(max_rows=8, max_cols=9), st.data())
def test_solve_against_enumeration(dense, data):
    rhs = data.draw(arrays(np.uint8, dense.shape[0], elements=st.integers(0, 1)))
    M = GF2Matrix.from_dense(dense)
    res = solve(M, GF2Vector.from_bits(rhs))
    brute = brute_solutions(dense, rhs)
    if not brute:
        assert res is None
        return
    x0, basis = res
    assert np.array_equal(mat_vec(M, x0).to_bits(), rhs)
    assert 2 ** len(basis) == len(brute)
    for z in basis:
        assert mat_vec(M, z).weight() == 0


@settings(max_examples=100, deadline=None)
@given(dense_matrices(max_rows=12, max_cols=100))
def test_nullspace_dimension(dense):
    M = GF2Matrix.from_dense(dense)
    ns = nullspace(M)
    assert len(ns) == dense.shape[1] - rank_int_rows(dense)
    stacked = np.array([z.to_bits() for z in ns]) if ns else np.zeros((0, dense.shape[1]), np.uint8)
    assert rank_int_rows(stacked) == len(ns)
    for z in ns:
        assert mat_vec(M, z).weight() == 0


@settings(max_examples=100, deadline=None)
@given(dense_matrices(max_rows=15, max_cols=80))
def test_row_basis_greedy_rank(dense):
    M = GF2Matrix.from_dense(dense)
    basis = RowBasis(M.cols)
    added = sum(basis.try_add(row) for row in M.data)
    assert added == basis.size == rank_int_rows(dense)
    # every original row reduces to zero against the basis
    for row in M.data:
        assert not basis.reduce(row).any()
    # reduced echelon form: each pivot column is zero in all other rows
    for i, p in enumerate(basis.pivots):
        col = basis.column(int(p))
        assert col[i] == 1 and col.sum() == 1


@settings(max_examples=60, deadline=None)
@given(dense_matrices(max_rows=10, max_cols=40), st.data())
def test_try_add_all_is_atomic(dense, data):
    M = GF2Matrix.from_dense(dense)
    basis = RowBasis(M.cols)
    k = data.draw(st.integers(0, M.rows))
    for row in M.data[:k]:
        basis.try_add(row)
    before = basis.rows
    rest = M.data[k:]
    ok = basis.try_add_all(rest)
    union_rank = rank_int_rows(np.vstack([unpack_bits(before, M.cols).reshape(-1, M.cols),
                                         unpack_bits(rest, M.cols).reshape(-1, M.cols)]))
    if ok:
        assert basis.size == before.shape[0] + rest.shape[0] == union_rank
    else:
        assert np.array_equal(basis.rows, before)
        assert union_rank < before.shape[0] + rest.shape[0]


def test_column_submatrix_full_rank():
    M = GF2Matrix.from_rows(["110", "011", "101"])
    assert column_submatrix_full_rank(M, [0, 1])
    assert not column_submatrix_full_rank(GF2Matrix.from_rows(["11", "11"]), [0, 1])


def test_vector_ops_and_validation():
    a = GF2Vector.from_string("1010")
    b = GF2Vector.from_string("0110")
    assert (a ^ b).to_string() == "1100"
    assert a.weight() == 2 and a[0] == 1 and a[1] == 0
    with pytest.raises(ValueError):
        mat_vec(GF2Matrix.zeros(2, 3), a)
    with pytest.raises(ValueError):
        GF2Matrix(1, 3, np.array([[8]], dtype=np.uint64))
