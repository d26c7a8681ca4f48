import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockriccati.errors import DimensionMismatch, NotHermitian, Singular
from blockriccati.numkernel import (
    DEFAULT_TOL,
    ToleranceProfile,
    cluster_eigenvalues,
    hermitian_eig,
    null_space,
    numerical_rank,
    orthonormal_basis,
    reduced_resolvent,
    solve_linear,
)

from randomops import random_hermitian

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 12)


def test_tolerance_profile_rejects_nonpositive():
    for bad in (0.0, -1e-8, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            ToleranceProfile(rank_rtol=bad)


def test_identity_eigenvalues():
    eig = hermitian_eig(np.eye(3))
    np.testing.assert_allclose(eig.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(eig.vectors.conj().T @ eig.vectors, np.eye(3), atol=1e-14)


def test_swap_matrix_eigenpairs():
    eig = hermitian_eig([[0, 1], [1, 0]])
    np.testing.assert_allclose(eig.eigenvalues, [-1, 1], atol=1e-15)
    for k, sign in enumerate((-1, 1)):
        v = eig.vectors[:, k]
        expected = np.array([1, sign]) / np.sqrt(2)
        assert abs(abs(np.vdot(expected, v)) - 1) < 1e-14


def test_diagonal_block_eigenvalues():
    eig = hermitian_eig(np.diag([1.0, 0.0]))
    np.testing.assert_allclose(eig.eigenvalues, [0, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig([[1, 2], [0, 1]])


def test_eig_handles_empty_and_scalar():
    assert hermitian_eig(np.zeros((0, 0))).dim == 0
    eig = hermitian_eig([[3.5]])
    assert eig.eigenvalues.tolist() == [3.5]


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=dims, degenerate=st.booleans())
def test_eig_reconstruction_and_orthonormality(seed, dim, degenerate):
    m = random_hermitian(np.random.default_rng(seed), dim, degenerate)
    eig = hermitian_eig(m)
    scale = np.linalg.norm(m)
    assert np.linalg.norm(m - eig.reconstruct()) <= 1e-10 * scale
    assert np.abs(eig.vectors.conj().T @ eig.vectors - np.eye(dim)).max() <= 1e-10
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    np.testing.assert_allclose(eig.eigenvalues, np.linalg.eigvalsh(m), atol=1e-10 * scale)


def test_cluster_chains():
    groups = cluster_eigenvalues(np.array([0.0, 1e-9, 1.0, 2.0, 2.0 + 5e-9]), 1e-8)
    assert [g.tolist() for g in groups] == [[0, 1], [2], [3, 4]]


def test_numerical_rank_examples():
    assert numerical_rank(np.zeros((2, 3))) == 0
    assert numerical_rank(np.eye(4)) == 4
    assert numerical_rank([[1, 0], [1, 1]]) == 2
    assert numerical_rank([[1, 2], [2, 4 + 1e-14]]) == 1


def test_basis_and_null_space_are_complementary():
    m = np.array([[1, 1, 0], [1, 1, 0]], dtype=complex)
    ker = null_space(m)
    ran = orthonormal_basis(m)
    assert ker.shape == (3, 2) and ran.shape == (2, 1)
    assert np.abs(m @ ker).max() < 1e-14


def test_reduced_resolvent_examples():
    eig = hermitian_eig(np.diag([1.0, 0.0]))
    np.testing.assert_allclose(reduced_resolvent(eig, 1.0), np.diag([0.0, -1.0]))
    np.testing.assert_allclose(reduced_resolvent(eig, 0.5), np.diag([2.0, -2.0]))
    # 1 / (-1 - sqrt 2) rationalised
    r = reduced_resolvent(hermitian_eig([[-1.0]]), np.sqrt(2))
    assert abs(r[0, 0] - (1 - np.sqrt(2))) < 1e-15


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=dims)
def test_reduced_resolvent_properties(seed, dim):
    rng = np.random.default_rng(seed)
    a0 = random_hermitian(rng, dim, degenerate=bool(seed % 2))
    eig = hermitian_eig(a0)
    radius = DEFAULT_TOL.cluster_radius(eig.norm)

    # at an eigenvalue: commutes with A0 and inverts A0 - lam off its kernel
    lam = float(eig.eigenvalues[rng.integers(dim)])
    r = reduced_resolvent(eig, lam)
    assert np.linalg.norm(r @ a0 - a0 @ r) <= 1e-10 * max(np.linalg.norm(a0, 2), 1) * max(np.linalg.norm(r, 2), 1)
    e = eig.projection(eig.near(lam, radius))
    raw = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    x = raw - e @ raw
    shifted = a0 - lam * np.eye(dim)
    # rounding in (A0 - lam) x is amplified by ||R||
    slack = 1e-13 * np.linalg.norm(r, 2) * np.linalg.norm(shifted, 2)
    assert np.linalg.norm(r @ shifted @ x - x) <= (1e-9 + slack) * np.linalg.norm(raw)

    # away from the spectrum: equals the plain inverse
    lam = float(eig.eigenvalues[-1] + 0.5 + rng.random())
    expected = solve_linear(a0 - lam * np.eye(dim), np.eye(dim))
    np.testing.assert_allclose(reduced_resolvent(eig, lam), expected, atol=1e-9)


def test_solve_linear_examples():
    rhs = np.array([[1 + 2j, 3], [4, 5j]])
    np.testing.assert_allclose(solve_linear(np.eye(2), rhs), rhs)
    np.testing.assert_allclose(solve_linear(np.diag([2.0, 4.0]), [1.0, 1.0]), [0.5, 0.25])


def test_solve_linear_against_direct_inverse():
    a0 = np.diag([1.0, 0.0])
    v = np.array([[1.0, 0.0], [1.0, 1.0]])
    z = 1 + 1j
    # (A0 - z)^{-1} = diag(1/(1-z), 1/(-z))
    expected = np.diag([1 / (1 - z), -1 / z]) @ v
    np.testing.assert_allclose(solve_linear(a0 - z * np.eye(2), v), expected, atol=1e-15)


def test_solve_linear_approaches_reduced_resolvent():
    a0 = np.diag([1.0, 0.0])
    v = np.array([[1.0, 0.0], [1.0, 1.0]])
    lam = 0.5
    r = reduced_resolvent(hermitian_eig(a0), lam) @ v
    for eps in (1e-4, 1e-6, 1e-8):
        near = solve_linear(a0 - (lam + 1j * eps) * np.eye(2), v)
        assert np.abs(near - r).max() < 10 * eps


def test_solve_linear_errors():
    with pytest.raises(Singular):
        solve_linear([[1, 2], [2, 4]], [1, 1])
    with pytest.raises(DimensionMismatch):
        solve_linear(np.ones((2, 3)), np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve_linear(np.eye(2), np.ones(3))
