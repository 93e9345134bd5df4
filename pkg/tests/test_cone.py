import numpy as np
import pytest
from hypothesis import given, strategies as st

from gramcone import Signal, StateSpace, random_system
from gramcone.cone import (GramianMatrix, StateBalance, controllability_gramian, in_cone,
                           is_controllable, membership_residual, random_cone_element,
                           rank_one_decompose, reconstruct)
from gramcone.errors import DomainError
from gramcone.oracles import gramian_exact

from conftest import example_gramian


def test_example_membership():
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    res, lo = membership_residual(example_gramian(), sys)
    assert res < 1e-12 and abs(lo) < 1e-12
    assert in_cone(example_gramian(), sys)
    assert in_cone(np.zeros((2, 2)), sys)
    assert np.linalg.matrix_rank(example_gramian()) == 1


def test_controllability_gramian_block_member():
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    V = np.diag([controllability_gramian(sys)[0, 0].real, 1.0])
    assert membership_residual(V, sys)[0] < 1e-14


def test_random_psd_rejected(rng):
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    G = rng.standard_normal((2, 2))
    V = G @ G.T + np.diag([5.0, 0.0])
    assert not in_cone(V, sys)
    with pytest.raises(DomainError):
        rank_one_decompose(V, sys)


@pytest.mark.parametrize("A, B, expected", [
    ([[0.5]], [[1.0]], True),
    ([[0.5]], [[0.0]], False),
    (np.diag([0.5, 0.3]), [[1.0], [0.0]], False),
])
def test_is_controllable(A, B, expected):
    A, B = np.array(A), np.array(B)
    sys = StateSpace(A, B, np.zeros((1, A.shape[0])), np.zeros((1, 1)))
    assert is_controllable(sys) is expected


def test_example_decomposition():
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    (c,) = rank_one_decompose(example_gramian(), sys)
    np.testing.assert_allclose(c.x_s, [2.0], atol=1e-12)
    np.testing.assert_allclose(c.w_s, [1.0], atol=1e-12)
    assert c.theta == pytest.approx(0.0, abs=1e-12)
    assert c.eigen_residual(sys) < 1e-12


def test_block_element_decomposition():
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    V = np.diag([4 / 3, 1.0])
    comps = rank_one_decompose(V, sys)
    assert len(comps) <= 2
    np.testing.assert_allclose(reconstruct(comps, 1, 1), V, atol=1e-8)


def test_random_cone_element_deterministic(rng):
    sys = random_system(rng, 2, 1, 1, rho=0.8)
    V1, V2 = random_cone_element(sys, seed=3), random_cone_element(sys, seed=3)
    np.testing.assert_array_equal(np.asarray(V1), np.asarray(V2))
    assert in_cone(V1, sys)


@given(st.integers(1, 3), st.integers(1, 2), st.integers(0, 2**31))
def test_decomposition_round_trip(n, m, seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, n, m, 1, rho=0.85)
    V = np.asarray(random_cone_element(sys, seed=seed))
    comps = rank_one_decompose(V, sys)
    assert len(comps) <= n + m
    np.testing.assert_allclose(reconstruct(comps, n, m), V, atol=1e-7 * np.linalg.norm(V))
    for c in comps:
        assert in_cone(c.matrix(), sys, tol=1e-7)


@given(st.integers(0, 2**31), st.integers(1, 20))
def test_simulated_gramians_are_members(seed, L):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, 2, 2, 1, rho=0.9)
    w = Signal(rng.standard_normal((L, 2)) + 1j * rng.standard_normal((L, 2)))
    assert in_cone(gramian_exact(sys, w), sys, tol=1e-9)


def test_gramian_matrix_blocks():
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    G = GramianMatrix.for_system(example_gramian(), sys)
    assert G.X[0, 0] == 4 and G.R[0, 0] == 2 and G.W[0, 0] == 1
    with pytest.raises(DomainError):
        GramianMatrix.for_system(np.zeros((3, 3)), sys)


def test_state_balance_properties(rng):
    sys = random_system(rng, 3, 1, 1, rho=0.9)
    bal = StateBalance.of(sys)
    np.testing.assert_allclose(controllability_gramian(bal.balanced), np.eye(3), atol=1e-9)
    Vb = np.asarray(random_cone_element(bal.balanced, seed=1))
    assert in_cone(bal.V_back(Vb), sys, tol=1e-8)
    # uncontrollable pair keeps the original coordinates
    un = StateSpace.scalar(0.5, 0.0, 1.0, 1.0)
    np.testing.assert_array_equal(StateBalance.of(un).T, np.eye(1))
