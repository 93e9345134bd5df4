import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gramcone import StateSpace, random_system
from gramcone.cone import RankOneComponent, random_cone_element, rank_one_decompose
from gramcone.errors import DomainError
from gramcone.oracles import gramian_exact, gramian_of, simulate
from gramcone.synthesis import (choose_window, error_bound_constants, rank_one_bound,
                                rank_one_error, synth, synth_rank_one)

from conftest import example_gramian

PLANT = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
COMP = RankOneComponent(np.array([2.0 + 0j]), np.array([1.0 + 0j]), 0.0)


@pytest.mark.parametrize("a, C1", [(0.0, 1.0), (0.5, 4 / 3), (0.9, 1 / (1 - 0.81))])
def test_bound_constants(a, C1):
    k = error_bound_constants(StateSpace.scalar(a, 1.0, 0.0, 0.0))
    assert k.C1 == pytest.approx(C1, rel=1e-10)
    assert k.S1 == pytest.approx(1 / (1 - a), rel=1e-10)
    assert k.C == pytest.approx(2 * k.S1 + k.C1, rel=1e-12)


def test_bound_constants_zero_dynamics():
    assert error_bound_constants(StateSpace.scalar(0.0, 1.0, 0.0, 0.0)).C == pytest.approx(3.0)


def test_rank_one_window_error_and_decay():
    e100, w = rank_one_error(COMP, PLANT, 100)
    assert e100 <= rank_one_bound(COMP, PLANT, 100)
    np.testing.assert_allclose(w.gramian(), [[1.0]], atol=1e-14)
    e400, _ = rank_one_error(COMP, PLANT, 400)
    assert e400 <= 0.25 * e100 * 1.05


def test_zero_component_zero_signal():
    c = RankOneComponent(np.zeros(1, dtype=complex), np.zeros(1, dtype=complex), 0.3)
    w = synth_rank_one(c, PLANT, 16)
    assert w.energy() == 0
    assert rank_one_error(c, PLANT, 16)[0] == 0


def test_choose_window():
    N = choose_window(COMP, PLANT, 1e-2)
    assert rank_one_error(COMP, PLANT, N)[0] < 1e-2
    assert choose_window(COMP, PLANT, 1e300) == 1
    slow = StateSpace.scalar(0.99, 1.0, 0.0, 0.0)
    comp = RankOneComponent(np.array([1.0 + 0j]), np.array([0.01 + 0j]), 0.0)
    assert comp.eigen_residual(slow) < 1e-15
    assert choose_window(comp, slow, 1e-2) > choose_window(
        RankOneComponent(np.array([1.0 + 0j]), np.array([0.5 + 0j]), 0.0), PLANT, 1e-2)
    with pytest.raises(DomainError):
        choose_window(COMP, PLANT, 0.0)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_example_synthesis(eps):
    w, rep = synth(example_gramian(), PLANT, eps)
    assert rep.achieved_error < eps
    assert rep.W_residual <= 1e-10
    V = gramian_exact(PLANT, w)
    assert np.linalg.norm(V - example_gramian()) == pytest.approx(rep.achieved_error, rel=1e-9)


def test_simulated_gramian_agrees():
    w, rep = synth(example_gramian(), PLANT, 1e-2)
    V = gramian_of(simulate(PLANT, w), tail_tol=1e-14)
    assert np.linalg.norm(V - example_gramian()) <= rep.achieved_error + 1e-6


def test_zero_gramian_empty_signal():
    w, rep = synth(np.zeros((2, 2)), PLANT, 1e-3)
    assert len(w) == 0 and rep.achieved_error == 0


def test_non_member_rejected():
    with pytest.raises(DomainError, match="residual"):
        synth(np.eye(2), PLANT, 1e-2)


def test_support_grows_as_eps_shrinks(rng):
    sys = random_system(rng, 2, 1, 1, rho=0.8)
    V = np.asarray(random_cone_element(sys, seed=5))
    supports = []
    for eps in (1e-1, 1e-2, 1e-3):
        w, rep = synth(V, sys, eps)
        assert rep.achieved_error < eps
        assert rep.W_residual <= 1e-10
        supports.append(rep.support)
    assert supports == sorted(supports)


@settings(max_examples=6)
@given(st.integers(1, 2), st.integers(1, 2), st.integers(0, 2**31))
def test_random_elements_realised(n, m, seed):
    sys = random_system(np.random.default_rng(seed), n, m, 1, rho=0.8)
    V = np.asarray(random_cone_element(sys, seed=seed))
    w, rep = synth(V, sys, 1e-2)
    assert rep.achieved_error < 1e-2
    assert rep.W_residual <= 1e-10
    for err, bound in zip(rep.component_errors, rep.component_bounds):
        assert err <= bound


def test_single_component_matches_decomposition():
    (c,) = rank_one_decompose(example_gramian(), PLANT)
    w = synth_rank_one(c, PLANT, 64)
    np.testing.assert_allclose(w.samples[:, 0], np.full(64, 1 / 8), atol=1e-15)
