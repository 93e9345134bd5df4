import numpy as np
import pytest
from hypothesis import given, strategies as st

from gramcone import Signal, StateSpace, random_system
from gramcone.errors import DomainError
from gramcone.oracles import freq_grid_hinf, gramian_exact, gramian_of, simulate, transfer_function


def test_zero_input_zero_state(gain_two):
    traj = simulate(gain_two, Signal.zeros(1, 5))
    assert np.all(traj.states == 0)
    np.testing.assert_array_equal(gramian_of(traj), np.zeros((2, 2)))


def test_impulse_recursion(gain_two):
    traj = simulate(gain_two, Signal(np.array([1.0])), extra_settle=4)
    np.testing.assert_allclose(traj.states[:, 0].real, [0, 1, 0.5, 0.25, 0.125, 0.0625])


def test_unit_delay_shifts(delay):
    traj = simulate(delay, Signal(np.array([1.0, 0, 0])))
    np.testing.assert_allclose(traj.outputs[:, 0].real, [0, 1, 0])


def test_unit_delay_impulse_gramian(delay):
    V = gramian_of(simulate(delay, Signal(np.array([1.0]))))
    np.testing.assert_allclose(V, np.eye(2), atol=1e-15)


def test_channel_mismatch(gain_two):
    with pytest.raises(DomainError):
        simulate(gain_two, Signal(np.zeros((3, 2))))


@given(st.integers(0, 2**31), st.integers(1, 30))
def test_gramian_tail_methods_agree(seed, L):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, 3, 2, 1, rho=0.8)
    w = Signal(rng.standard_normal((L, 2)) + 1j * rng.standard_normal((L, 2)))
    Vs = gramian_of(simulate(sys, w), tail_tol=1e-14)
    Ve = gramian_exact(sys, w)
    np.testing.assert_allclose(Vs, Ve, atol=1e-6 * (1 + np.linalg.norm(Ve)))
    np.testing.assert_allclose(Ve[3:, 3:], w.gramian(), atol=1e-12)


def test_transfer_function_methods_agree(rng):
    sys = random_system(rng, 4, 2, 2, rho=0.9)
    theta = np.linspace(0, 2 * np.pi, 257)
    G1 = transfer_function(sys, theta, "solve")
    G2 = transfer_function(sys, theta, "eig")
    np.testing.assert_allclose(G1, G2, atol=1e-10 * (1 + np.abs(G1).max()))


def test_freq_grid_examples(gain_two, delay):
    g = freq_grid_hinf(gain_two, 4096)
    assert g.lower == pytest.approx(4.0, abs=1e-6)
    assert g.argmax_theta == pytest.approx(0.0, abs=1e-12)
    D = np.array([[1.0, 2.0], [0.5, -1.0]])
    static = StateSpace(np.zeros((1, 1)), np.zeros((1, 2)), np.zeros((2, 1)), D)
    assert freq_grid_hinf(static, 64).lower == pytest.approx(np.linalg.norm(D, 2) ** 2)
    assert freq_grid_hinf(delay, 64).lower == pytest.approx(1.0)


@given(st.integers(0, 2**31))
def test_nested_grids_monotone(seed):
    sys = random_system(np.random.default_rng(seed), 3, 1, 2, rho=0.85)
    vals = [freq_grid_hinf(sys, 2**k * 64).lower for k in range(5)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_energy_bound_by_grid(rng):
    # ||z||^2 <= mu ||w||^2 for any input; the grid gives a lower bound on mu
    sys = random_system(rng, 3, 1, 1, rho=0.7)
    w = Signal(rng.standard_normal((40, 1)))
    V = gramian_exact(sys, w)
    Psi = sys.io_map()
    Z = (Psi @ V @ Psi.conj().T)[:1, :1].real
    mu_hi = freq_grid_hinf(sys, 2**16).lower * (1 + 1e-6)
    assert Z[0, 0] <= mu_hi * w.energy()


def test_unstable_model_rejected_unless_allowed():
    with pytest.raises(DomainError):
        StateSpace.scalar(1.5, 1.0, 1.0, 0.0)
    sys = StateSpace.scalar(1.5, 1.0, 1.0, 0.0, allow_unstable=True)
    traj = simulate(sys, Signal(np.array([1.0])), extra_settle=2)
    np.testing.assert_allclose(traj.states[:, 0].real, [0, 1, 1.5, 2.25])
