from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twdiag.boxes import congruent_diagonal
from twdiag.field import RATIONAL
from twdiag.oracle import (MalformedTrace, bareiss_determinant, dense_congruent_diagonalize,
                           random_instance, replay_trace, trace_emits)
from twdiag.matrix import SparseSymmetricMatrix
from twdiag.treedecomp import nicify, validate

small = st.integers(-4, 4).map(Fraction)


def sym_matrices(max_n=7):
    return st.integers(1, max_n).flatmap(lambda n: st.lists(
        st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)).map(
        lambda rows: [[rows[max(i, j)][min(i, j)] for j in range(len(rows))] for i in range(len(rows))])


def naive_det(A):
    n = len(A)
    if n == 0:
        return Fraction(1)
    return sum((-1) ** j * A[0][j] * naive_det([row[:j] + row[j + 1:] for row in A[1:]])
               for j in range(n))


def test_example(example_matrix):
    r = dense_congruent_diagonalize(example_matrix.to_dense())
    assert r.inertia == (3, 2, 1) and r.rank == 5 and r.det == 0


def test_diagonal_input_unchanged():
    r = dense_congruent_diagonalize([[Fraction(5), Fraction(0)], [Fraction(0), Fraction(-3)]])
    assert sorted(r.diagonal) == [(1, 5), (2, -3)]


@settings(max_examples=200, deadline=None)
@given(sym_matrices())
def test_dense_oracle_against_cofactor_and_bareiss(A):
    r = dense_congruent_diagonalize(A)
    det = naive_det(A)
    assert r.det == det == bareiss_determinant(A)
    assert sum(r.inertia) == len(A)


def test_bareiss_needs_swaps():
    A = [[Fraction(0), Fraction(1), Fraction(2)], [Fraction(1), Fraction(0), Fraction(3)],
         [Fraction(2), Fraction(3), Fraction(1, 2)]]
    assert bareiss_determinant(A) == naive_det(A)
    assert bareiss_determinant([]) == 1


def test_replay_example(example_matrix, example_td):
    trace = []
    D = congruent_diagonal(example_matrix, example_td, trace=trace)
    for schedule in (False, True):
        A = replay_trace(example_matrix, trace, schedule=schedule)
        assert [A[i][i] for i in range(6)] == [2, 1, -2, -1, 1, 0]
        assert all(A[i][j] == 0 for i in range(6) for j in range(6) if i != j)
    assert trace_emits(trace) == list(D)


def test_replay_empty():
    Z = SparseSymmetricMatrix(3, {})
    assert replay_trace(Z, []) == [[0] * 3 for _ in range(3)]


@pytest.mark.parametrize("line", ["addrow 1 2", "addrow 1 9 1", "bogus", "addrow 1 2 x",
                                  "enter 1 2"])
def test_malformed_trace(example_matrix, line):
    with pytest.raises(MalformedTrace):
        replay_trace(example_matrix, [line], schedule=True)


def test_random_instance_contract():
    M, T = random_instance(6, 2, 11)
    assert T.width <= 2
    validate(T, M.underlying_graph())
    M, _ = random_instance(10, 3, 4, zero_diag=1.0)
    assert all(M.get(v, v) is None for v in range(1, 11))
    with pytest.raises(ValueError):
        random_instance(3, 3, 0)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 12), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_tree_dp_matches_oracles(n, k, seed):
    M, T = random_instance(n, min(k, n - 1), seed)
    D = congruent_diagonal(M, nicify(T))
    dense = M.to_dense()
    r = dense_congruent_diagonalize(dense)
    signs = [0, 0, 0]
    det = Fraction(1)
    for _, d in D:
        signs[0 if d > 0 else 1 if d < 0 else 2] += 1
        det *= d
    assert tuple(signs) == r.inertia
    assert det == r.det == bareiss_determinant(dense)
