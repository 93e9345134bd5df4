import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gramcone import StateSpace, random_system
from gramcone.errors import DomainError
from gramcone.hinf import hinf_primal, kyp_strict
from gramcone.robust import (certificate_search, extract_destabilizing_pair, full_block, iqc,
                             lmi_certificate_valid, make_uncertainty, scalar_block, stability_lmi,
                             two_block)


def herm(rng, d):
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (M + M.conj().T) / 2


def test_full_block_map_and_adjoint():
    unc = full_block(1, 1)
    V = np.array([[3.0, 0.5], [0.5, 1.0]])
    assert unc(V)[0, 0].real == pytest.approx(2.0)
    np.testing.assert_allclose(unc.adjoint(np.array([[2.0]])), np.diag([2.0, -2.0]))


def test_scalar_block_map_and_adjoint(rng):
    unc = scalar_block(2)
    V = herm(rng, 4)
    np.testing.assert_allclose(unc(V), V[:2, :2] - V[2:, 2:], atol=1e-14)
    Y = herm(rng, 2)
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, :2], expected[2:, 2:] = Y, -Y
    np.testing.assert_allclose(unc.adjoint(Y), expected, atol=1e-14)


@given(st.integers(0, 2**31))
def test_adjoint_identity(seed):
    rng = np.random.default_rng(seed)
    for unc in (full_block(2, 1), scalar_block(2), two_block(1, 1, 1, 1)):
        V, Y = herm(rng, unc.p + unc.m), herm(rng, unc.d)
        lhs = np.trace(Y @ unc.f.linear(V)).real
        rhs = np.trace(unc.adjoint(Y) @ V).real
        assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(lhs)))


def test_iqc_matches_full_block_trace(rng):
    V = herm(rng, 2)
    Pi = np.diag([1.0, -1.0])
    assert iqc(Pi, 1)(V)[0, 0].real == pytest.approx(full_block(1, 1)(V)[0, 0].real)


def test_make_uncertainty_checks_dims(gain_two):
    assert make_uncertainty("full_block", gain_two).kind == "full_block"
    with pytest.raises(DomainError):
        make_uncertainty("scalar_block", gain_two, p=2, m=1)
    with pytest.raises(DomainError):
        make_uncertainty("bogus", gain_two)


def test_small_gain_feasible():
    sys = StateSpace.scalar(0.5, 1.0, 0.25, 0.0)  # peak gain 0.5
    v = stability_lmi(sys, full_block(1, 1))
    assert v.status == "robust-LMI-feasible"
    assert lmi_certificate_valid(sys, full_block(1, 1), v.P, v.Y)
    # dividing by the scalar multiplier gives a strict KYP certificate
    assert kyp_strict(sys).holds


def test_large_gain_certificate(gain_two):
    v = stability_lmi(gain_two, full_block(1, 1))
    assert v.status == "certificate-found"
    assert v.certificate_value == pytest.approx(3.0, rel=1e-4)
    np.testing.assert_allclose(v.V_cert.V, [[4, 2], [2, 1]], atol=1e-3)


def test_certificate_search_cases(gain_two):
    c = certificate_search(gain_two, full_block(1, 1))
    assert c.status == "found"
    c_iqc = certificate_search(gain_two, iqc(np.diag([1.0, -1.0]), 1))
    assert c_iqc.status == "found"
    np.testing.assert_allclose(c_iqc.V.V, c.V.V, atol=1e-3)
    small = StateSpace.scalar(0.5, 1.0, 0.25, 0.0)
    assert certificate_search(small, full_block(1, 1)).status == "none-found"


def test_scaled_small_gain():
    # the multiplier certifies ||Y^{1/2} G Y^{-1/2}|| < 1; Y = diag(1, 100) shrinks G[0, 1]
    A = np.diag([0.5, 0.4])
    B = np.eye(2)
    C = np.array([[0.2, 2.0], [0.002, 0.2]])
    sys = StateSpace(A, B, C, np.zeros((2, 2)))
    assert hinf_primal(sys).mu_inf > 1
    v = stability_lmi(sys, scalar_block(2))
    assert v.status == "robust-LMI-feasible"
    Y = v.Y
    lam, U = np.linalg.eigh(Y)
    Yh = U @ np.diag(np.sqrt(lam)) @ U.conj().T
    Yih = U @ np.diag(1 / np.sqrt(lam)) @ U.conj().T
    scaled = sys.input_output_scaled(Yih, Yh)
    assert hinf_primal(scaled).mu_inf < 1


def test_destabilizing_pair(gain_two):
    t0 = time.perf_counter()
    v = stability_lmi(gain_two, full_block(1, 1))
    pair = extract_destabilizing_pair(v.V_cert, gain_two, 1e-2)
    assert time.perf_counter() - t0 < 5
    assert pair.energy_z - pair.energy_w >= 3 - 0.1
    np.testing.assert_allclose(pair.z.energy(), pair.energy_z, rtol=1e-8)
    assert pair.f_min_eig >= v.certificate_value - pair.eps_f - 1e-9


def test_forward_bound_linear_in_eps(gain_two):
    V = np.array([[4.0, 2.0], [2.0, 1.0]])
    a = extract_destabilizing_pair(V, gain_two, 1e-2)
    b = extract_destabilizing_pair(V, gain_two, 5e-3)
    assert b.eps_f == pytest.approx(a.eps_f / 2, rel=0.1)


def test_no_certificate_for_stable(rng):
    sys = random_system(rng, 2, 1, 1, rho=0.5)
    sys = sys.scaled(0.3 / np.sqrt(hinf_primal(sys).mu_inf))
    assert stability_lmi(sys, full_block(1, 1)).V_cert is None
