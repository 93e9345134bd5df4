import numpy as np
import pytest
from hypothesis import given, strategies as st

from gramcone import StateSpace, block_diag_systems, random_system
from gramcone.errors import DomainError
from gramcone.hinf import hinf_primal
from gramcone.maps import AffineMap
from gramcone.robust import scalar_block, stability_lmi


def test_state_space_shapes():
    sys = StateSpace(np.zeros((2, 2)), np.ones((2, 1)), np.ones((3, 2)), np.zeros((3, 1)))
    assert (sys.n, sys.m, sys.p) == (2, 1, 3)
    with pytest.raises(DomainError):
        StateSpace(np.zeros((2, 2)), np.ones((3, 1)), np.ones((1, 2)), np.zeros((1, 1)))
    with pytest.raises(DomainError):
        StateSpace(np.zeros((2, 3)), np.ones((2, 1)), np.ones((1, 2)), np.zeros((1, 1)))


def test_io_map_and_weight(gain_two):
    Psi = gain_two.io_map()
    np.testing.assert_allclose(Psi, [[1, 0], [0, 1]])
    np.testing.assert_allclose(gain_two.output_weight(), [[1, 0], [0, 0]])


def test_block_diag_decouples(gain_two, delay):
    sys = block_diag_systems(gain_two, delay)
    assert (sys.n, sys.m, sys.p) == (2, 2, 2)
    assert hinf_primal(sys).mu_inf == pytest.approx(4.0, rel=1e-5)


def test_random_system_radius(rng):
    sys = random_system(rng, 4, 2, 1, rho=0.75)
    assert sys.rho == pytest.approx(0.75)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31))
def test_affine_map_adjoint(m, q, seed):
    rng = np.random.default_rng(seed)

    def herm(d):
        M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return (M + M.conj().T) / 2

    G = rng.standard_normal((q, m)) + 1j * rng.standard_normal((q, m))
    f = AffineMap.from_linear(lambda W: G @ W @ G.conj().T, m, q, herm(q))
    W, Y = herm(m), herm(q)
    lhs = np.trace(Y @ f.linear(W)).real
    rhs = np.trace(f.adjoint(Y) @ W).real
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(lhs)))
    np.testing.assert_allclose(f(W), f.linear(W) + f.const, atol=1e-12)
    assert f.operator_norm() >= abs(lhs) / (np.linalg.norm(W) * np.linalg.norm(Y)) - 1e-12


def test_scalar_map():
    f = AffineMap.scalar(np.eye(2), -1.0)
    assert f(np.diag([0.25, 0.5]))[0, 0].real == pytest.approx(-0.25)
    np.testing.assert_allclose(f.negated()(np.eye(2)), [[-1.0]])


def test_badly_scaled_certificate_verified_in_balanced_coordinates(rng):
    # large input/output scaling shrinks the raw-coordinate margin below the absolute threshold
    g0 = random_system(rng, 2, 2, 2, rho=0.7)
    g0 = g0.scaled(np.sqrt(0.8 / hinf_primal(g0).mu_inf))
    D = np.diag([1.0, 20.0])
    sys = g0.input_output_scaled(D, np.linalg.inv(D))
    v = stability_lmi(sys, scalar_block(2))
    assert v.status == "robust-LMI-feasible"
    assert v.lmi_max_eig < 0
