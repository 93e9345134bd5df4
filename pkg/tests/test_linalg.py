import numpy as np
import pytest
from hypothesis import given, strategies as st

from gramcone.errors import DomainError
from gramcone.linalg import (dlyap, frobenius_distance, herm_coords, herm_eig, herm_from_coords,
                             hermitian_basis, is_schur_stable, jacobi_eigh, matrix_power_norms,
                             realify, spectral_radius, unrealify)


def random_hermitian(rng, n):
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (M + M.conj().T) / 2


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_herm_eig_small_cases(method):
    lam, U = herm_eig(np.eye(2), method)
    np.testing.assert_allclose(lam, [1, 1], atol=1e-12)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    lam, _ = herm_eig(np.diag([3.0, -1.0]), method)
    np.testing.assert_allclose(lam, [-1, 3], atol=1e-12)
    lam, _ = herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]), method)
    np.testing.assert_allclose(lam, [-1, 1], atol=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_jacobi_matches_lapack(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    lj, Uj = herm_eig(H, "jacobi")
    ll, _ = herm_eig(H, "lapack")
    np.testing.assert_allclose(lj, ll, atol=1e-10 * (1 + np.abs(ll).max()))
    np.testing.assert_allclose(Uj.conj().T @ Uj, np.eye(n), atol=1e-9)
    np.testing.assert_allclose(Uj @ np.diag(lj) @ Uj.conj().T, H, atol=1e-9 * (1 + np.abs(ll).max()))


def test_jacobi_real_symmetric(rng):
    S = rng.standard_normal((7, 7))
    S = S + S.T
    d, Q = jacobi_eigh(S)
    np.testing.assert_allclose(np.sort(d), np.linalg.eigvalsh(S), atol=1e-11)
    np.testing.assert_allclose(Q @ np.diag(d) @ Q.T, S, atol=1e-11)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(DomainError):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("A, rho", [
    (np.array([[0.5]]), 0.5),
    (np.zeros((1, 1)), 0.0),
    (np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0),
])
def test_spectral_radius(A, rho):
    assert spectral_radius(A) == pytest.approx(rho, abs=1e-12)


def test_schur_stability():
    assert is_schur_stable(np.array([[0.5]]), 0.0)
    assert not is_schur_stable(np.array([[1.0]]), 0.0)
    assert is_schur_stable(np.array([[0.9, 0.5], [0.0, 0.9]]), 0.0)


def test_dlyap_examples(rng):
    np.testing.assert_allclose(dlyap(np.array([[0.5]]), np.array([[1.0]])), [[4 / 3]])
    A = rng.standard_normal((3, 3)) * 0.2
    np.testing.assert_allclose(dlyap(A, np.zeros((3, 3))), 0, atol=1e-15)
    Q = random_hermitian(rng, 3)
    np.testing.assert_allclose(dlyap(np.zeros((3, 3)), Q), Q, atol=1e-14)


@given(st.integers(1, 4), st.integers(0, 2**31))
def test_dlyap_against_scipy(n, seed):
    from scipy.linalg import solve_discrete_lyapunov

    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A *= 0.8 / spectral_radius(A)
    Q = random_hermitian(rng, n)
    X = dlyap(A, Q)
    np.testing.assert_allclose(X, solve_discrete_lyapunov(A, Q), atol=1e-9 * (1 + np.abs(X).max()))
    np.testing.assert_allclose(A @ X @ A.conj().T - X + Q, 0, atol=1e-9 * (1 + np.abs(X).max()))


def test_realify_examples(rng):
    np.testing.assert_allclose(realify(np.array([[1.0]])), np.eye(2))
    H = 1j * np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(np.linalg.eigvalsh(realify(H)), [-1, -1, 1, 1], atol=1e-12)
    G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    P = G @ G.conj().T
    assert herm_eig(realify(P))[0].min() >= -1e-12


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_realify_round_trip_and_spectrum(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    np.testing.assert_allclose(unrealify(realify(H)), H, atol=1e-14)
    lam = np.linalg.eigvalsh(H)
    np.testing.assert_allclose(np.linalg.eigvalsh(realify(H)), np.sort(np.repeat(lam, 2)), atol=1e-10)


def test_frobenius_distance():
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert frobenius_distance(X, X) == 0
    assert frobenius_distance(X, np.zeros((2, 2))) == 1
    x, y = np.array([1.0, 2.0j]), np.array([3.0, -1.0, 1j])
    assert frobenius_distance(np.outer(x, y.conj()), np.zeros((2, 3))) == pytest.approx(
        np.linalg.norm(x) * np.linalg.norm(y))
    with pytest.raises(DomainError):
        frobenius_distance(np.zeros((2, 2)), np.zeros((3, 3)))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_hermitian_basis_orthonormal(n, rng):
    B = hermitian_basis(n)
    G = np.real(np.einsum("aij,bji->ab", B, B))
    np.testing.assert_allclose(G, np.eye(n * n), atol=1e-14)
    H = random_hermitian(rng, n)
    np.testing.assert_allclose(herm_from_coords(herm_coords(H), n), H, atol=1e-13)


def test_matrix_power_norms_geometric():
    a = matrix_power_norms(np.array([[0.5]]))
    np.testing.assert_allclose(a[:5], 0.5 ** np.arange(5))
    assert (a**2).sum() == pytest.approx(4 / 3, rel=1e-12)
