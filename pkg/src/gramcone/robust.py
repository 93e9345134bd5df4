"""Robust stability of ``w = Delta z`` around ``z = G w`` via gramian relations.

An uncertainty class is described by a linear map ``f`` on the joint
gramian ``Lambda(z, w) = [[Z, *], [*, W]]`` such that admissible pairs have
``f(Lambda(z, w)) >= 0``. With ``Psi = [[C, D], [0, I]]`` the relations
reachable through the plant are ``f(Psi V Psi^*)`` for ``V`` in the cone
with ``tr W = 1``. Exactly one of the following holds:

* some such ``V`` gives ``f(Psi V Psi^*) >= 0`` and nonzero (a pair
  ``(w, z)`` that the uncertainty can close, so robust stability fails);
* there are ``P`` and ``Y > 0`` with
  ``K(P) + Psi^* f^*(Y) Psi < 0`` (a scaled small-gain certificate).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cone import ConeVariable, GramianMatrix, StateBalance
from .errors import DomainError
from .hinf import (P_PENALTY, _bounded_P, congruent_max_eig, kyp_matrix, kyp_terms, max_eig,
                   w_selector)
from .linalg import hermitian_basis, herm_from_coords, hermitian_part, min_eig
from .maps import AffineMap
from .oracles import Signal, gramian_exact, simulate
from .sdp import INFEASIBLE, OPTIMAL, ConicProgram, SolverParams, solve, strictness_margin
from .synthesis import synth

NONZERO_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class UncertaintySpec:
    """``f: H^{p+m} -> H^d`` (stored as an :class:`AffineMap` with zero constant)."""

    kind: str
    p: int
    m: int
    f: AffineMap
    params: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.f.q

    def __call__(self, V):
        return self.f.linear(V)

    def adjoint(self, Y):
        return self.f.adjoint(Y)


def _zw_block(p, m, zi, wi):
    """``tr Z_zi - tr W_wi`` as a coefficient matrix on H^{p+m}."""
    G = np.zeros((p + m, p + m))
    G[zi, zi] = 1.0
    G[p + wi, p + wi] = -1.0
    return G


def full_block(p, m):
    return UncertaintySpec("full_block", p, m, AffineMap.scalar(_zw_block(p, m, np.arange(p), np.arange(m)), 0.0,
                                                              "tr Z - tr W"))


def block_diagonal(out_sizes, in_sizes):
    """``Delta = diag(Delta_1, ..., Delta_k)``, full blocks; ``f = diag(tr Z_i - tr W_i)``."""
    out_sizes, in_sizes = [int(a) for a in out_sizes], [int(b) for b in in_sizes]
    if len(out_sizes) != len(in_sizes) or not out_sizes or min(out_sizes + in_sizes) < 1:
        raise DomainError("block partition needs matching positive output and input sizes")
    p, m, k = sum(out_sizes), sum(in_sizes), len(out_sizes)
    zo, wo = np.cumsum([0] + out_sizes), np.cumsum([0] + in_sizes)
    Ek = hermitian_basis(k)
    coef = np.zeros((k * k, p + m, p + m), dtype=complex)
    for i in range(k):
        G = _zw_block(p, m, np.arange(zo[i], zo[i + 1]), np.arange(wo[i], wo[i + 1]))
        # f(V) = sum_i <G_i, V> e_i e_i^*; coefficient of basis element E_l is sum_i <E_l, e_i e_i^*> G_i
        for l in range(k * k):
            coef[l] += Ek[l][i, i].real * G
    kind = "two_block" if k == 2 else "block_diagonal"
    f = AffineMap(coef, np.zeros((k, k)), "diag(tr Z_i - tr W_i)")
    return UncertaintySpec(kind, p, m, f, {"out_sizes": out_sizes, "in_sizes": in_sizes})


def two_block(p1, p2, m1, m2):
    return block_diagonal([p1, p2], [m1, m2])


def scalar_block(k):
    """``Delta = delta I_k``: ``f(V) = Z - W``."""
    k = int(k)

    def fn(V):
        return V[:k, :k] - V[k:, k:]

    return UncertaintySpec("scalar_block", k, k, AffineMap.from_linear(fn, 2 * k, k, np.zeros((k, k)), "Z - W"))


def iqc(Pi, p):
    """Quadratic constraint ``sum_k [z; w]^* Pi [z; w] >= 0``: ``f(V) = tr(Pi V)``."""
    Pi = np.atleast_2d(np.asarray(Pi, dtype=complex))
    if Pi.shape[0] != Pi.shape[1] or np.linalg.norm(Pi - Pi.conj().T) > 1e-12 * (1 + np.linalg.norm(Pi)):
        raise DomainError("IQC multiplier Pi must be Hermitian")
    p = int(p)
    m = Pi.shape[0] - p
    if m < 1 or p < 1:
        raise DomainError(f"Pi of size {Pi.shape[0]} does not split into p={p} outputs and m>=1 inputs")
    return UncertaintySpec("iqc", p, m, AffineMap.scalar(hermitian_part(Pi), 0.0, "tr(Pi V)"), {"Pi": Pi})


def make_uncertainty(kind, sys=None, **params):
    """Build an uncertainty descriptor by name, checking dimensions against ``sys``."""
    kind = kind.lower()
    p = params.get("p", sys.p if sys is not None else None)
    m = params.get("m", sys.m if sys is not None else None)
    if kind == "full_block":
        unc = full_block(p, m)
    elif kind in ("two_block", "block_diagonal"):
        unc = block_diagonal(params["out_sizes"], params["in_sizes"])
    elif kind == "scalar_block":
        if p != m:
            raise DomainError(f"scalar block needs p == m, got p={p}, m={m}")
        unc = scalar_block(p)
    elif kind == "iqc":
        unc = iqc(params["Pi"], p)
    else:
        raise DomainError(f"unknown uncertainty kind {kind!r}")
    if sys is not None and (unc.p != sys.p or unc.m != sys.m):
        raise DomainError(f"uncertainty acts on p={unc.p}, m={unc.m}; system has p={sys.p}, m={sys.m}")
    return unc


def _check_dims(sys, unc):
    if unc.p != sys.p or unc.m != sys.m:
        raise DomainError(f"uncertainty acts on p={unc.p}, m={unc.m}; system has p={sys.p}, m={sys.m}")


def pulled_back(sys, unc, Y):
    """``Psi^* f^*(Y) Psi``."""
    Psi = sys.io_map()
    return hermitian_part(Psi.conj().T @ unc.adjoint(Y) @ Psi)


def stability_lmi_matrix(sys, unc, P, Y):
    return kyp_matrix(sys, P) + pulled_back(sys, unc, Y)


def lmi_certificate_valid(sys, unc, P, Y, delta=None, congruence=None):
    """``Y >= delta I`` and ``L^* (K(P) + Psi^* f^*(Y) Psi) L <= -delta I`` for ``L = congruence``."""
    delta = strictness_margin(sys.A, sys.B, sys.C, sys.D) if delta is None else delta
    Y = np.atleast_2d(Y)
    top = congruent_max_eig(stability_lmi_matrix(sys, unc, P, Y), congruence)
    return bool(min_eig(Y) >= delta and top <= -delta)


@dataclass
class CertificateResult:
    status: str  # "found" | "none-found" | solver status
    V: GramianMatrix | None = None
    value: float = float("nan")
    f_value: np.ndarray | None = None


def certificate_search(sys, unc: UncertaintySpec, params: SolverParams | None = None):
    """Maximise ``tr f(Psi V Psi^*)`` over ``f(.) >= 0``, ``V`` in the cone, ``tr W = 1``.

    An optimum above ``NONZERO_TOL`` is a nonzero admissible relation; an
    infeasible program or a zero optimum means none exists.
    """
    params = params or SolverParams()
    _check_dims(sys, unc)
    bal = StateBalance.of(sys)
    sb = bal.balanced
    Psi = sb.io_map()
    prog = ConicProgram("max")
    cv = ConeVariable(prog, sb)
    prog.add_equality({cv.handle: cv.w_selector()}, 1.0)
    d = unc.d
    pulled = [cv.coef(Psi.conj().T @ T @ Psi) for T in unc.f.coef]
    Ed = hermitian_basis(d)
    if d == 1:
        S = prog.add_nonneg(1)
        prog.add_equality({cv.handle: pulled[0], S: [-1.0]}, 0.0)
    else:
        S = prog.add_psd(d)
        for k, E in enumerate(Ed):
            prog.add_equality({cv.handle: pulled[k], S: -E}, 0.0)
    obj = sum(np.real(np.trace(E)) * G for E, G in zip(Ed, pulled))
    prog.set_objective({cv.handle: obj})
    sol = solve(prog, params)
    if sol.status == INFEASIBLE:
        return CertificateResult("none-found")
    if sol.status != OPTIMAL:
        return CertificateResult(sol.status)
    V = GramianMatrix.for_system(bal.V_back(cv.lift(sol.values[cv.handle])), sys)
    fv = unc(sys.io_map() @ V.V @ sys.io_map().conj().T)
    value = float(sol.primal_objective)
    if value > NONZERO_TOL:
        return CertificateResult("found", V, value, fv)
    return CertificateResult("none-found", V, value, fv)


def lmi_search(sys, unc: UncertaintySpec, params: SolverParams | None = None):
    """Maximise the margin ``s`` in ``K(P) + Psi^* f^*(Y) Psi <= -s I``, ``Y >= s I``, ``tr Y = 1``.

    ``Y = Y0 + s I`` with ``Y0 >= 0``. Returns ``(P, Y, s)`` or Nones when
    the solver does not converge.
    """
    params = params or SolverParams()
    bal = StateBalance.of(sys)
    sb = bal.balanced
    n, m, d = sys.n, sys.m, unc.d
    q = n + m
    Psi = sb.io_map()
    prog = ConicProgram("max")
    P, t = _bounded_P(prog, n)
    s = prog.add_free(1)
    Y0 = prog.add_nonneg(1) if d == 1 else prog.add_psd(d)
    Sl = prog.add_psd(q)
    FK = kyp_terms(sb)
    shift = pulled_back(sb, unc, np.eye(d)) + np.eye(q)
    # S + K(P) + Psi^* f^*(Y0) Psi + s (Psi^* f^*(I) Psi + I) = 0
    for l, E in enumerate(hermitian_basis(q)):
        fE = unc(Psi @ E @ Psi.conj().T)
        y_coef = [float(np.real(fE[0, 0]))] if d == 1 else fE
        prog.add_equality({
            Sl: E,
            P: np.real(np.einsum("kij,ji->k", FK, E)),
            Y0: y_coef,
            s: [float(np.real(np.trace(E @ shift)))],
        }, 0.0)
    # tr Y0 + d s = 1
    prog.add_equality({Y0: [1.0] if d == 1 else np.eye(d), s: [float(d)]}, 1.0)
    prog.set_objective({s: [1.0], t: [-P_PENALTY]})
    sol = solve(prog, params)
    if sol.status != OPTIMAL:
        return None, None, float("nan")
    sv = float(sol.values[s][0])
    Y0v = np.array([[sol.values[Y0][0]]]) if d == 1 else sol.values[Y0]
    Y = hermitian_part(Y0v + sv * np.eye(d))
    return bal.P_back(herm_from_coords(sol.values[P], n)), Y, sv


@dataclass
class StabilityVerdict:
    status: str  # "robust-LMI-feasible" | "certificate-found" | "inconclusive"
    P: np.ndarray | None = None
    Y: np.ndarray | None = None
    V_cert: GramianMatrix | None = None
    lmi_max_eig: float = float("nan")
    certificate_value: float = float("nan")
    margin: float = float("nan")
    pair: object = None


def stability_lmi(sys, unc: UncertaintySpec, params: SolverParams | None = None):
    """Search for the small-gain certificate; failing that, for a destabilising relation."""
    params = params or SolverParams()
    _check_dims(sys, unc)
    delta = strictness_margin(sys.A, sys.B, sys.C, sys.D)
    P, Y, s = lmi_search(sys, unc, params)
    L = StateBalance.of(sys).state_map()
    if P is not None and lmi_certificate_valid(sys, unc, P, Y, delta, L):
        return StabilityVerdict("robust-LMI-feasible", P=P, Y=Y,
                                lmi_max_eig=max_eig(stability_lmi_matrix(sys, unc, P, Y)), margin=s)
    cert = certificate_search(sys, unc, params)
    if cert.status == "found":
        return StabilityVerdict("certificate-found", V_cert=cert.V, certificate_value=cert.value)
    return StabilityVerdict("inconclusive", margin=s, certificate_value=cert.value)


@dataclass
class DestabilizingPair:
    w: Signal
    z: Signal
    f_value: np.ndarray
    f_min_eig: float
    eps_f: float
    gramian_error: float
    energy_z: float
    energy_w: float


def extract_destabilizing_pair(V_cert, sys, eps, unc: UncertaintySpec | None = None, tail_tol=1e-14):
    """Synthesise ``w`` for the certificate and return ``(w, z = G w)`` with diagnostics.

    ``z`` covers the support of ``w`` plus the free response until its
    remaining energy is below ``tail_tol``. ``eps_f`` is the forward bound
    ``||f|| ||Psi||^2 ||Lambda(Mw, w) - V||_F`` on how far ``f`` of the
    realised relation can be from ``f(Psi V Psi^*)``.
    """
    unc = unc or full_block(sys.p, sys.m)
    _check_dims(sys, unc)
    Vm = V_cert.V if isinstance(V_cert, GramianMatrix) else np.asarray(V_cert, dtype=complex)
    w, report = synth(Vm, sys, eps)
    Vw = gramian_exact(sys, w)
    Psi = sys.io_map()
    fv = unc(Psi @ Vw @ Psi.conj().T)
    gerr = float(np.linalg.norm(Vw - Vm))
    eps_f = unc.f.operator_norm() * np.linalg.norm(Psi, 2) ** 2 * gerr
    x = simulate(sys, w).states[-1] if len(w) else np.zeros(sys.n)
    settle = 0
    decay = max(np.linalg.norm(sys.C, 2), 1.0)
    while sys.n and np.linalg.norm(x) * decay > np.sqrt(tail_tol) and settle < 10**7:
        x = sys.A @ x
        settle += 1
    traj = simulate(sys, w, extra_settle=settle)
    z = Signal(traj.outputs)
    ZW = Psi @ Vw @ Psi.conj().T
    return DestabilizingPair(w, z, fv, min_eig(fv), float(eps_f), gerr,
                             float(np.real(np.trace(ZW[: sys.p, : sys.p]))), w.energy())
