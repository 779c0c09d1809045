import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_rank_matrix
from normalform.errors import (
    BaseNotRegular,
    DimensionMismatch,
    DomainError,
    ExtendedSingular,
    NonFinite,
    NotAComplex,
    SingularBlock,
)
from normalform.linear_core import (
    Blocks,
    ChainFamily,
    OperatorFamily,
    Subspace,
    block_inverse_schur,
    canonical_bordering,
    certify_uniform_regularity,
    chain_uniform_regularity,
    extended_operator,
    extended_operator_test,
    factorize_regular,
    fredholm_index,
    projection_case_check,
)


def _eig_kernel(T, tol=1e-8):
    """Kernel from the eigendecomposition of ``T^T T`` (independent of the SVD path)."""
    w, V = np.linalg.eigh(T.T @ T)
    return V[:, w <= tol * max(1.0, w.max(initial=0.0))]


def test_diagonal_example():
    nf = factorize_regular(np.diag([2.0, 0.0]))
    assert nf.rank == 1
    assert nf.kernel.dim == 1 and nf.cokernel.dim == 1
    assert np.allclose(nf.kernel.basis[:, 0], [0, 1])
    assert np.allclose(nf.cokernel.basis[:, 0], [0, 1])
    assert np.allclose(nf.core, [[2.0]])
    assert nf.index == 0


def test_zero_and_empty_matrices():
    nf = factorize_regular(np.zeros((3, 2)))
    assert (nf.rank, nf.kernel.dim, nf.cokernel.dim) == (0, 2, 3)
    assert nf.reconstruction_residual() == 0.0
    nf = factorize_regular(np.zeros((0, 3)))
    assert nf.kernel.dim == 3 and nf.index == 3


def test_nonfinite_rejected():
    with pytest.raises(NonFinite):
        factorize_regular(np.array([[np.nan, 1.0]]))


def test_signs_are_canonical(rng):
    T = random_rank_matrix(rng, 5, 4, 2)
    nf = factorize_regular(T)
    for B in (nf.kernel.basis, nf.coimage.basis, nf.image.basis, nf.cokernel.basis):
        for col in B.T:
            first = col[np.flatnonzero(np.abs(col) > 1e-8)[0]]
            assert first > 0


@pytest.mark.parametrize("m,n,r", [(6, 4, 2), (4, 6, 4), (5, 5, 5), (7, 3, 0), (8, 8, 3)])
def test_subspaces_match_eigen_oracle(rng, m, n, r):
    T = random_rank_matrix(rng, m, n, r)
    nf = factorize_regular(T)
    assert nf.rank == r
    K = _eig_kernel(T)
    W = _eig_kernel(T.T)
    assert nf.kernel.same_as(Subspace(n, K))
    assert nf.cokernel.same_as(Subspace(m, W))
    assert nf.reconstruction_residual() <= 1e-10 * np.linalg.norm(T, 2)
    assert nf.orthogonality_residual() <= 1e-12
    assert np.linalg.norm(T @ nf.kernel.basis) <= 1e-10 * max(1.0, np.linalg.norm(T))


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(-5, 5)))
def test_factorization_properties(T):
    nf = factorize_regular(T)
    m, n = T.shape
    assert nf.kernel.dim + nf.rank == n
    assert nf.cokernel.dim + nf.rank == m
    assert nf.reconstruction_residual() <= 1e-9 * max(1.0, np.linalg.norm(T, 2))
    assert nf.orthogonality_residual() <= 1e-10
    if nf.rank:
        assert np.linalg.cond(nf.core) < 1e11


def test_fredholm_index():
    assert fredholm_index(np.zeros((2, 5))) == 3
    assert fredholm_index(np.eye(3)) == 0


def test_subspace_helpers():
    S = Subspace.span(np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]]))
    assert S.dim == 1
    assert S.contains(np.array([3.0, 0.0, 3.0]))
    assert not S.contains(np.array([1.0, 0.0, 0.0]))
    C = S.orthogonal_complement()
    assert C.dim == 2
    assert np.allclose(S.projector() + C.projector(), np.eye(3))
    assert S.orthonormality_residual() < 1e-15


# --- block inversion --------------------------------------------------------


def _well_conditioned(rng, n, k):
    while True:
        A = rng.standard_normal((n, n))
        if np.linalg.cond(A) < 50 and np.linalg.cond(A[:k, :k]) < 50:
            return A


def test_schur_matches_direct_inverse(rng):
    for _ in range(20):
        k = int(rng.integers(1, 6))
        A = _well_conditioned(rng, 6, k)
        B = Blocks.split(np.linalg.inv(A), k)
        assert np.allclose(block_inverse_schur(B), np.linalg.inv(A[:k, :k]), atol=1e-10)


def test_schur_singular_block():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])  # A11 = 0, so B22 = 0
    with pytest.raises(SingularBlock):
        block_inverse_schur(Blocks.split(np.linalg.inv(A), 1))


def test_blocks_roundtrip(rng):
    M = rng.standard_normal((5, 7))
    assert np.array_equal(Blocks.split(M, 2, 3).assemble(), M)


def test_projection_case_on_bordered_operator(rng):
    T = random_rank_matrix(rng, 5, 4, 2)
    nf = factorize_regular(T)
    Tp, Tm = canonical_bordering(nf)
    E = extended_operator(T, Tp, Tm)
    Einv = np.linalg.inv(E)
    A = Blocks.split(E, 5, 4)
    B = Blocks.split(Einv, 4, 5)
    cert = projection_case_check(A, B)
    assert cert.precondition_ok and cert.passed
    # T S is the orthogonal projector onto img T
    S = Einv[:4, :5]
    assert np.allclose(T @ S, nf.image.projector(), atol=1e-10)


def test_projection_case_precondition_fails(rng):
    A = _well_conditioned(rng, 4, 2)
    cert = projection_case_check(Blocks.split(A, 2), Blocks.split(np.linalg.inv(A), 2))
    assert not cert.precondition_ok and not cert.passed


# --- families ---------------------------------------------------------------


def test_uniform_regularity_certificate(rng):
    T0 = random_rank_matrix(rng, 4, 5, 2)
    T1 = rng.standard_normal((4, 5))
    F = OperatorFamily(1, lambda p: T0 + p[0] * T1)
    cert = certify_uniform_regularity(F, np.linspace(-1e-3, 1e-3, 11)[:, None])
    assert cert.certified
    assert len(cert.condition_numbers) == 11


def test_uniform_regularity_detects_collapse():
    # the compressed operator is 1 - p: singular at p = 1
    F = OperatorFamily(1, lambda p: np.diag([1.0 - p[0], 0.0]))
    cert = certify_uniform_regularity(F, [[0.0], [0.5], [1.0]])
    assert cert.verdicts == [True, True, False]
    assert not cert.certified


def test_semicontinuity_is_diagnostic_only():
    # kernel dimension drops away from 0; still certified
    F = OperatorFamily(1, lambda p: np.diag([1.0, p[0]]))
    cert = certify_uniform_regularity(F, [[0.0], [0.1]])
    assert cert.certified


def test_family_box_and_base():
    F = OperatorFamily(1, lambda p: np.eye(2), box=1.0)
    with pytest.raises(DomainError):
        F.sample([2.0])
    with pytest.raises(DimensionMismatch):
        F.sample([0.0, 0.0])
    bad = OperatorFamily(1, lambda p: np.full((2, 2), np.inf))
    with pytest.raises(BaseNotRegular):
        bad.base


def test_extended_operator_equivalence(rng):
    T0 = random_rank_matrix(rng, 4, 5, 3)
    T1 = rng.standard_normal((4, 5))
    F = OperatorFamily(1, lambda p: T0 + p[0] * T1)
    nf = F.base
    Tp, Tm = canonical_bordering(nf)
    cert = extended_operator_test(F, Tp, Tm, np.linspace(-1e-3, 1e-3, 5)[:, None])
    assert cert.passed
    assert cert.s_minus_plus_norm_at_zero <= 1e-12


def test_extended_operator_singular():
    F = OperatorFamily.constant(np.zeros((2, 2)))
    with pytest.raises(ExtendedSingular):
        extended_operator_test(F, np.zeros((2, 0)), np.zeros((0, 2)), [[0.0]])


def test_extended_dimension_mismatch(rng):
    F = OperatorFamily.constant(np.eye(2))
    with pytest.raises(DimensionMismatch):
        extended_operator_test(F, np.zeros((2, 1)), np.zeros((0, 2)), [[0.0]])


# --- chains -----------------------------------------------------------------


def test_chain_homology_of_circle():
    # circle with two vertices and two edges: h = (1, 1)
    d0 = np.array([[-1.0, 1.0], [1.0, -1.0]])
    cert = chain_uniform_regularity(ChainFamily.constant([d0]), [[0.0]])
    assert cert.homology == [1, 1]
    assert cert.euler_characteristic == 0
    assert all(cert.decomposition_exact)
    assert cert.certified


def test_chain_oracle_rank_formula(rng):
    # h_i = dim X_i - rank T_i - rank T_{i-1}, with exact ranks by construction
    A = random_rank_matrix(rng, 5, 3, 2)
    P = np.eye(5) - factorize_regular(A).image.projector()
    B = random_rank_matrix(rng, 4, 5, 2) @ P
    cert = chain_uniform_regularity(ChainFamily.constant([A, B]), [[0.0]])
    rb = np.linalg.matrix_rank(B, tol=1e-8)
    assert cert.homology == [3 - 2, 5 - 2 - rb, 4 - rb]


def test_not_a_complex():
    with pytest.raises(NotAComplex):
        chain_uniform_regularity(ChainFamily.constant([np.eye(2), np.eye(2)]), [[0.0]])
