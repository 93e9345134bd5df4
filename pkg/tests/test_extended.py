import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gramcone import StateSpace, block_diag_systems, random_system
from gramcone.cone import in_cone
from gramcone.errors import DomainError
from gramcone.extended import (build_spec, custom, ext_hinf_primal, grouped, per_channel,
                               principal_component, square_certificate_valid,
                               square_hinf_dual_check, unit_energy)
from gramcone.hinf import hinf_primal
from gramcone.maps import AffineMap
from gramcone.sdp import OPTIMAL, UNBOUNDED, SolverParams

TIGHT = SolverParams(tol=1e-8)


def double_system():
    g = StateSpace.scalar(0.5, 1.0, 1.0, 0.0)
    return block_diag_systems(g, g)


def test_unit_energy_maps():
    spec = build_spec("unit_energy", m=2)
    assert len(spec.maps) == 2
    W = np.diag([0.3, 0.2])
    vals = sorted(float(f(W)[0, 0].real) for f in spec.maps)
    np.testing.assert_allclose(vals, [-0.5, 0.5])


def test_per_channel_and_grouped_maps():
    spec = build_spec("per_channel", bounds=[1, 1, 1])
    W = np.diag([0.5, 2.0, 1.0])
    np.testing.assert_allclose([f(W)[0, 0].real for f in spec.maps], [-0.5, 1.0, 0.0])
    g = grouped([[0, 1], [2, 3]], [1, 1])
    W = np.diag([0.2, 0.3, 0.4, 0.9])
    np.testing.assert_allclose([f(W)[0, 0].real for f in g.maps], [-0.5, 0.3])
    with pytest.raises(DomainError):
        grouped([[0, 1], [1, 2]], [1, 1])
    with pytest.raises(DomainError):
        per_channel([1, -1])


def test_decoupled_per_channel_value():
    r = ext_hinf_primal(double_system(), per_channel([1, 1]))
    assert r.status == OPTIMAL
    assert r.value == pytest.approx(8.0, rel=1e-5)
    assert r.violation <= 1e-5


def test_grouped_decoupled_value():
    r = ext_hinf_primal(double_system(), grouped([[0], [1]], [1, 2]))
    assert r.value == pytest.approx(12.0, rel=1e-5)


@settings(max_examples=6)
@given(st.integers(1, 3), st.integers(1, 2), st.integers(0, 2**31))
def test_unit_energy_specialises(n, m, seed):
    sys = random_system(np.random.default_rng(seed), n, m, 2, rho=0.8)
    r = ext_hinf_primal(sys, unit_energy(m), TIGHT)
    mu = hinf_primal(sys, TIGHT).mu_inf
    assert r.value == pytest.approx(mu, abs=1e-6 * (1 + mu))


def test_principal_component_identity_scalar(rng):
    sys = random_system(rng, 2, 1, 1, rho=0.7)
    r = ext_hinf_primal(sys, principal_component(np.eye(1)), TIGHT)
    mu = hinf_primal(sys, TIGHT).mu_inf
    assert r.value == pytest.approx(mu, abs=1e-6 * (1 + mu))


@settings(max_examples=5)
@given(st.integers(0, 2**31))
def test_per_channel_sandwich_and_admissible(seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, 2, 2, 1, rho=0.8)
    spec = per_channel([1.0, 1.0])
    r = ext_hinf_primal(sys, spec, TIGHT)
    mu = hinf_primal(sys, TIGHT).mu_inf
    assert mu - 1e-5 * (1 + mu) <= r.value <= 2 * mu + 1e-5 * (1 + mu)
    assert in_cone(r.V_opt.V, sys, tol=1e-5)
    assert spec.violation(r.V_opt.W) <= 1e-5
    Chat = sys.output_weight()
    assert np.trace(Chat @ r.V_opt.V).real == pytest.approx(r.value, rel=1e-4)


def test_loosening_bounds_monotone(rng):
    sys = random_system(rng, 2, 2, 2, rho=0.8)
    vals = [ext_hinf_primal(sys, per_channel([b, 1.0])).value for b in (0.5, 1.0, 1.5, 2.0)]
    assert all(b >= a - 1e-5 * (1 + a) for a, b in zip(vals, vals[1:]))


def test_unbounded_spec_detected(gain_two):
    # W[0,0] >= 0 only: no energy bound
    f = AffineMap.scalar(-np.eye(1), 0.0, "-W")
    r = ext_hinf_primal(gain_two, custom([f]))
    assert r.status == UNBOUNDED
    assert "infinite" in r.message


def test_dimension_mismatch(gain_two):
    with pytest.raises(DomainError):
        ext_hinf_primal(gain_two, per_channel([1, 1]))


def test_square_dual_small_gain(rng):
    sys = random_system(rng, 2, 2, 2, rho=0.7)
    tiny = sys.scaled(0.1 / np.sqrt(hinf_primal(sys).mu_inf))
    r = square_hinf_dual_check(tiny)
    assert r.holds
    assert square_certificate_valid(tiny, r.P, np.diag(r.Y))


def test_square_dual_fails_on_value_four():
    r = square_hinf_dual_check(StateSpace.scalar(0.5, 1.0, 1.0, 0.0))
    assert r.holds is False
    assert r.value == pytest.approx(4.0, rel=1e-5)


def test_square_dual_zero_output():
    sys = StateSpace.scalar(0.5, 1.0, 0.0, 0.0)
    r = square_hinf_dual_check(sys)
    assert r.holds
    # with P = 0 the state block of the LMI is zero, so only a nonzero P is strict
    assert not square_certificate_valid(sys, np.zeros((1, 1)), [0.5])
    assert square_certificate_valid(sys, 1e-2 * np.eye(1), [0.5])
