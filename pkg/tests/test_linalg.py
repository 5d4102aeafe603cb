import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from projconsensus.errors import CapacityError, InvalidInputError
from projconsensus.linalg import (Subspace, as_blocks, blocks_to_matrix,
                                  block_norm_matrix, induced_two_norm,
                                  intersect, is_projector, kernel_basis,
                                  mixed_matrix_norm, projector_onto,
                                  spectral_radius, subspace_equal)
from projconsensus.solver import stacked_blocks
from projconsensus import digraph as dg

from conftest import PAPER_A, random_projectors


def test_kernel_of_single_row():
    K = kernel_basis([[1, 2, 3, 4]])
    assert K.dim == 3
    assert np.max(np.abs(np.array([[1, 2, 3, 4]]) @ K.basis)) <= 1e-9


def test_kernel_of_zero_row_is_everything():
    assert kernel_basis(np.zeros((1, 3))).dim == 3


def test_kernel_of_identity_is_zero():
    assert kernel_basis(np.eye(3)).dim == 0


def test_kernel_with_no_rows():
    assert kernel_basis(np.zeros((0, 4))).dim == 4


def test_kernel_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        kernel_basis([[1.0, np.nan]])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(0, 5), st.integers(1, 5)),
              elements=st.floats(-1e3, 1e3, allow_subnormal=False)))
def test_kernel_basis_annihilated_and_orthonormal(A):
    K = kernel_basis(A)
    B = K.basis
    assert np.allclose(B.T @ B, np.eye(K.dim), atol=1e-10)
    scale = 1 + (np.max(np.abs(A)) if A.size else 0)
    if A.size and K.dim:
        assert np.max(np.abs(A @ B)) <= 1e-8 * scale
    assert is_projector(projector_onto(K))


def test_projector_examples():
    assert np.array_equal(projector_onto(Subspace.zero(2)), np.zeros((2, 2)))
    assert np.allclose(projector_onto(Subspace.full(2)), np.eye(2))
    S = Subspace(3, np.eye(3)[:, :2])
    assert np.allclose(projector_onto(S), np.diag([1.0, 1.0, 0.0]))


def test_intersect_paper_rows():
    K1 = kernel_basis(PAPER_A[[0]])
    K3 = kernel_basis(PAPER_A[[2]])
    S = intersect([K1, K3])
    assert S.dim == 3 and subspace_equal(S, K1)


def test_intersect_two_distinct_rows_matches_stack_rank():
    K1, K2 = kernel_basis(PAPER_A[[0]]), kernel_basis(PAPER_A[[1]])
    stack_rank = np.sum(np.linalg.svd(PAPER_A[:2], compute_uv=False) > 1e-10)
    assert intersect([K1, K2]).dim == 4 - stack_rank == 2


def test_intersect_full_spaces():
    S = intersect([Subspace.full(3), Subspace.full(3)])
    assert S.dim == 3


def test_intersect_mismatch():
    with pytest.raises(InvalidInputError):
        intersect([Subspace.full(2), Subspace.full(3)])


def test_intersect_order_independent(rng):
    for _ in range(30):
        n = int(rng.integers(2, 6))
        subs = [kernel_basis(rng.standard_normal((int(rng.integers(0, n)), n)))
                for _ in range(int(rng.integers(2, 5)))]
        base = intersect(subs)
        for perm in itertools.permutations(range(len(subs))):
            assert subspace_equal(base, intersect([subs[i] for i in perm]))


def test_subspace_equal_examples():
    e1 = Subspace(2, [[1.0], [0.0]])
    assert subspace_equal(e1, Subspace.span([[2.0], [0.0]]))
    assert not subspace_equal(e1, Subspace(2, [[0.0], [1.0]]))
    assert subspace_equal(kernel_basis(PAPER_A[[0]]), kernel_basis(PAPER_A[[2]]))


def test_two_norm():
    assert induced_two_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-9)
    assert induced_two_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0, rel=1e-9)


def test_two_norm_of_projector_is_one(rng):
    for P in random_projectors(rng, 10, 4):
        eig = np.linalg.eigvalsh(P)
        if np.max(eig) > 0.5:
            assert induced_two_norm(P) == pytest.approx(1.0, rel=1e-9)


def test_mixed_norm_examples():
    assert mixed_matrix_norm(np.eye(6), block_size=2) == pytest.approx(1.0)
    assert mixed_matrix_norm(np.zeros((6, 6)), block_size=3) == 0.0


def test_mixed_norm_ragged_blocks():
    with pytest.raises(InvalidInputError):
        mixed_matrix_norm([[np.eye(2), np.eye(3)], [np.eye(2), np.eye(2)]])
    with pytest.raises(InvalidInputError):
        mixed_matrix_norm(np.eye(5), block_size=2)


def test_block_roundtrip(rng):
    M = rng.standard_normal((12, 12))
    assert np.array_equal(blocks_to_matrix(as_blocks(M, 3)), M)
    assert np.allclose(as_blocks(M, 3)[1, 2], M[3:6, 6:9])


def test_mixed_norm_nonexpansive_on_stacked_operators(rng):
    for _ in range(100):
        m, n = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        F = dg.flocking_matrix(dg.DiGraph.random(m, rng.random(), rng))
        blocks = stacked_blocks(random_projectors(rng, m, n), F)
        assert mixed_matrix_norm(blocks) <= 1 + 1e-9


def test_mixed_norm_submultiplicative(rng):
    for _ in range(100):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        Q1 = rng.standard_normal((m * n, m * n))
        Q2 = rng.standard_normal((m * n, m * n))
        lhs = mixed_matrix_norm(Q2 @ Q1, n)
        assert lhs <= mixed_matrix_norm(Q2, n) * mixed_matrix_norm(Q1, n) + 1e-9


def test_appendix_power_inequality(rng):
    for _ in range(50):
        m, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        M = rng.random((m, m)) * (rng.random((m, m)) < 0.7)
        P = random_projectors(rng, m, n)
        op = blocks_to_matrix(stacked_blocks(P, M))
        for k in range(1, 6):
            lhs = mixed_matrix_norm(np.linalg.matrix_power(op, k), n)
            rhs = np.max(np.linalg.matrix_power(M, k).sum(axis=1))
            assert lhs <= rhs + 1e-9
            # entrywise form of the same bound
            N = block_norm_matrix(np.linalg.matrix_power(op, k), n)
            assert np.all(N <= np.linalg.matrix_power(M, k) + 1e-9)


def test_spectral_radius_examples():
    assert spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9, abs=1e-8)
    S = np.array([[0.2, 0.8], [0.6, 0.4]])
    assert spectral_radius(S) == pytest.approx(1.0, abs=1e-8)


def test_spectral_radius_shared_kernel_direction():
    P = np.array([np.diag([1.0, 0.0])] * 2)
    F = np.full((2, 2), 0.5)
    op = blocks_to_matrix(stacked_blocks(P, F))
    # dense eigensolve is the oracle; stack{e1, e1} is a fixed vector
    v = np.array([1.0, 0.0, 1.0, 0.0])
    assert np.allclose(op @ v, v)
    assert spectral_radius(op) == pytest.approx(1.0, abs=1e-8)


def test_spectral_radius_cap():
    with pytest.raises(CapacityError):
        spectral_radius(np.eye(20), max_dim=10)
