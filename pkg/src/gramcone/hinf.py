"""H-infinity analysis over the gramian cone and its KYP dual.

The worst-case energy gain over unit-energy inputs is the SDP

    mu = max tr([C D]^* [C D] V)  s.t.  V in C,  tr W = 1,

whose Lagrange dual is the LMI problem

    min lambda  s.t.  K(P) + [C D]^* [C D] - lambda E_W <= 0,
    K(P) = [A B]^* P [A B] - [I 0]^* P [I 0].

``mu`` is the squared H-infinity norm.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cone import ConeVariable, GramianMatrix, StateBalance, is_controllable
from .errors import DomainError
from .linalg import hermitian_basis, herm_from_coords, hermitian_part
from .sdp import OPTIMAL, ConicProgram, SolverParams, add_lmi, solve, strictness_margin
from .system import StateSpace

P_PENALTY = 1e-6
GROWTH_RATIO = 3.0


def w_selector(sys):
    E = np.zeros((sys.n + sys.m,) * 2)
    E[sys.n:, sys.n:] = np.eye(sys.m)
    return E


def kyp_matrix(sys, P):
    """``[A B]^* P [A B] - [I 0]^* P [I 0]``."""
    AB = np.hstack([sys.A, sys.B])
    G = np.hstack([np.eye(sys.n), np.zeros((sys.n, sys.m))])
    P = np.asarray(P, dtype=complex)
    return hermitian_part(AB.conj().T @ P @ AB - G.conj().T @ P @ G)


def kyp_lmi(sys, P, lam=1.0):
    """``K(P) + [C D]^* [C D] - lam E_W``; negative semidefinite iff (P, lam) is dual feasible."""
    return kyp_matrix(sys, P) + sys.output_weight() - lam * w_selector(sys)


def max_eig(H):
    return float(np.linalg.eigvalsh(hermitian_part(H))[-1])


def congruent_max_eig(H, L=None):
    """``lambda_max(L^* H L)``; for invertible ``L`` its sign equals that of ``lambda_max(H)``.

    Strict certificates are checked against the absolute margin in the
    balanced coordinates the search ran in, where the margin is well scaled.
    """
    return max_eig(H if L is None else L.conj().T @ H @ L)


def kyp_terms(sys):
    """Coefficient tensor of ``P -> K(P)`` in the Hermitian basis coordinates of ``P``."""
    return np.array([kyp_matrix(sys, E) for E in hermitian_basis(sys.n)])


def decision_band(mu, params):
    return 10.0 * params.tol * (1.0 + abs(mu))


@dataclass
class HinfResult:
    status: str
    mu_inf: float
    V_opt: GramianMatrix | None
    dual_lambda: float
    dual_P: np.ndarray | None
    gap: float
    controllable: bool
    dual_attained: bool | None
    P_norm_trace: list = field(default_factory=list)
    iterations: int = 0

    @property
    def hinf_norm(self):
        return float(np.sqrt(max(self.mu_inf, 0.0)))

    @property
    def optimal(self):
        return self.status == OPTIMAL


@dataclass
class DualResult:
    status: str
    lam: float
    P: np.ndarray | None
    lmi_max_eig: float
    attained: bool | None
    P_norm_trace: list = field(default_factory=list)


def hinf_primal(sys: StateSpace, params: SolverParams | None = None, check_dual=True):
    """Squared H-infinity norm and a worst-case gramian from the cone program.

    For uncontrollable ``(A, B)`` the program is posed on the reachable
    subspace (equivalent, see :class:`ConeVariable`) and, with
    ``check_dual``, the dual is probed for attainment by
    :func:`dual_attainment`. A solver that does not reach optimality yields
    status other than ``"optimal"`` and ``mu_inf = nan``.
    """
    params = params or SolverParams()
    bal = StateBalance.of(sys)
    prog = ConicProgram("max")
    cv = ConeVariable(prog, bal.balanced)
    itr = prog.add_equality({cv.handle: cv.w_selector()}, 1.0)
    prog.set_objective({cv.handle: cv.coef(bal.balanced.output_weight())})
    sol = solve(prog, params)
    controllable = not cv.reduced
    if sol.status != OPTIMAL:
        return HinfResult(sol.status, float("nan"), None, float("nan"), None, float("nan"),
                          controllable, None, iterations=sol.iterations)
    mu = float(sol.primal_objective)
    V = GramianMatrix.for_system(bal.V_back(cv.lift(sol.values[cv.handle])), sys)
    lam = float(sol.duals[itr])
    gap = abs(mu - float(sol.dual_objective))
    if controllable:
        P = bal.P_back(-cv.multiplier(sol.duals))
        attained, trace = True, []
    else:
        P = None
        attained, trace = (None, [])
        if check_dual:
            probe = dual_attainment(sys, mu, params)
            attained, trace = probe.attained, probe.P_norm_trace
    return HinfResult(OPTIMAL, mu, V, lam, P, gap, controllable, attained, trace, sol.iterations)


def _bounded_P(prog, n):
    """Free ``P`` plus a scalar ``t`` with ``-t I <= P <= t I``."""
    P = prog.add_free(n * n)
    t = prog.add_free(1)
    E = hermitian_basis(n)
    I = -np.eye(n)[None]
    add_lmi(prog, np.zeros((n, n)), linear=[(P, E), (t, I)])
    add_lmi(prog, np.zeros((n, n)), linear=[(P, -E), (t, I)])
    return P, t


def _lambda_P_problem(sys, lam, params):
    """``min t`` with ``||P||_2 <= t`` over ``K(P) + C_hat - lam E_W <= 0``."""
    prog = ConicProgram("min")
    P, t = _bounded_P(prog, sys.n)
    add_lmi(prog, sys.output_weight() - lam * w_selector(sys), linear=[(P, kyp_terms(sys))])
    prog.set_objective({t: [1.0]})
    sol = solve(prog, params)
    if sol.status != OPTIMAL:
        return sol.status, None
    return sol.status, herm_from_coords(sol.values[P], sys.n)


def dual_attainment(sys, mu, params=None, decades=(1, 2), probe_tol=1e-5):
    """Probe whether the dual optimum ``lambda = mu`` is attained by a finite ``P``.

    For ``eta = (1 + mu) 10^-j`` compute the smallest-norm ``P`` feasible at
    ``lambda = mu + eta``. If the dual is attained these norms converge; if
    not they blow up like ``1/eta``. The dual counts as attained when the
    last decade grows the norm by less than ``GROWTH_RATIO`` and stays below
    ``1e6 (1 + ||A||^2)``. The probes only need a few correct digits, so they
    run at ``probe_tol``; smaller ``eta`` makes them badly conditioned.
    """
    params = params or SolverParams()
    params = replace(params, tol=max(params.tol, probe_tol))
    cap = 1e6 * (1.0 + np.linalg.norm(sys.A) ** 2)
    norms, P_last, lam_last, status = [], None, float("nan"), OPTIMAL
    for j in decades:
        lam = mu + (1.0 + mu) * 10.0 ** (-j)
        st, P = _lambda_P_problem(sys, lam, params)
        if P is None:
            status = st
            break
        norms.append(float(np.linalg.norm(P, 2)))
        P_last, lam_last = P, lam
    attained = None
    if status == OPTIMAL and len(norms) >= 2:
        growth = norms[-1] / max(norms[-2], 1e-12 * (1.0 + mu))
        attained = bool(growth < GROWTH_RATIO and norms[-1] <= cap) or norms[-1] <= 1e-9
    lmi = max_eig(kyp_lmi(sys, P_last, lam_last)) if P_last is not None else float("nan")
    return DualResult(status, lam_last, P_last, lmi, attained, norms)


def hinf_dual(sys: StateSpace, params: SolverParams | None = None):
    """Solve the LMI dual for ``(lambda, P)``.

    Controllable systems: the dual is attained and solved directly.
    Otherwise ``lambda`` is approached from above by :func:`dual_attainment`
    and the returned ``P`` is feasible for the returned ``lambda``.
    """
    params = params or SolverParams()
    if not is_controllable(sys):
        r = hinf_primal(sys, params, check_dual=False)
        if not r.optimal:
            return DualResult(r.status, float("nan"), None, float("nan"), None)
        return dual_attainment(sys, r.mu_inf, params)
    bal = StateBalance.of(sys)
    sb = bal.balanced
    prog = ConicProgram("min")
    P = prog.add_free(sys.n * sys.n)
    lam = prog.add_free(1)
    add_lmi(prog, sb.output_weight(),
            linear=[(P, kyp_terms(sb)), (lam, -w_selector(sb)[None])])
    prog.set_objective({lam: [1.0]})
    sol = solve(prog, params)
    if sol.status != OPTIMAL:
        return DualResult(sol.status, float("nan"), None, float("nan"), None)
    Pm = bal.P_back(herm_from_coords(sol.values[P], sys.n))
    lv = float(sol.values[lam][0])
    return DualResult(OPTIMAL, lv, Pm, max_eig(kyp_lmi(sys, Pm, lv)), True,
                      [float(np.linalg.norm(Pm, 2))])


@dataclass
class KypResult:
    status: str  # "holds" | "fails" | "inconclusive"
    mu_inf: float
    P: np.ndarray | None = None
    V_cert: GramianMatrix | None = None
    lmi_max_eig: float = float("nan")
    certificate_value: float = float("nan")
    margin: float = float("nan")

    @property
    def holds(self):
        return {"holds": True, "fails": False}.get(self.status)


def strict_margin_P(sys, params=None, constant=None):
    """Maximise ``s - P_PENALTY t`` over ``K(P) + M + s I <= 0``, ``||P|| <= t``.

    ``M`` defaults to ``[C D]^* [C D] - E_W``. The penalty keeps ``P``
    bounded when the supremal margin needs ``||P|| -> inf``. The search runs
    in gramian-balanced state coordinates, so ``s`` is the margin there. Returns
    ``(P, s)`` or ``(None, nan)`` when the solver does not converge.
    """
    params = params or SolverParams()
    M = sys.output_weight() - w_selector(sys) if constant is None else constant
    bal = StateBalance.of(sys)
    L = bal.state_map()
    prog = ConicProgram("max")
    P, t = _bounded_P(prog, sys.n)
    s = prog.add_free(1)
    add_lmi(prog, L.conj().T @ M @ L, linear=[(P, kyp_terms(bal.balanced))], margin=s)
    prog.set_objective({s: [1.0], t: [-P_PENALTY]})
    sol = solve(prog, params)
    if sol.status != OPTIMAL:
        return None, float("nan")
    return bal.P_back(herm_from_coords(sol.values[P], sys.n)), float(sol.values[s][0])


def _scaled(sys, gamma):
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    return sys if gamma == 1.0 else sys.scaled(1.0 / gamma)


def kyp_strict(sys: StateSpace, gamma=1.0, params: SolverParams | None = None):
    """Decide ``||G||_inf < gamma`` with a certificate either way.

    ``holds``: ``P`` with ``K(P) + M0 <= -delta I`` where
    ``M0 = [C D]^*[C D] - E_W`` (for the system scaled by ``1/gamma``).
    ``fails``: nonzero ``V`` in the cone with ``tr(M0 V) >= 0``.
    Within the solver's resolution of ``mu = 1`` the result is
    ``inconclusive``.
    """
    params = params or SolverParams()
    s = _scaled(sys, gamma)
    delta = strictness_margin(s.A, s.B, s.C, s.D)
    r = hinf_primal(s, params, check_dual=False)
    if not r.optimal:
        return KypResult("inconclusive", r.mu_inf)
    band = decision_band(r.mu_inf, params)
    M0 = s.output_weight() - w_selector(s)
    if r.mu_inf > 1.0 + band:
        val = float(np.real(np.trace(M0 @ r.V_opt.V)))
        return KypResult("fails", r.mu_inf, V_cert=r.V_opt, certificate_value=val)
    if r.mu_inf < 1.0 - band:
        P, margin = strict_margin_P(s, params)
        if P is not None:
            top = max_eig(kyp_matrix(s, P) + M0)
            L = StateBalance.of(s).state_map()
            if congruent_max_eig(kyp_matrix(s, P) + M0, L) <= -delta:
                return KypResult("holds", r.mu_inf, P=P, lmi_max_eig=top, margin=margin)
    return KypResult("inconclusive", r.mu_inf)


def kyp_nonstrict(sys: StateSpace, gamma=1.0, params: SolverParams | None = None):
    """Decide ``||G||_inf <= gamma`` for controllable ``(A, B)``.

    ``holds`` returns ``P`` with ``K(P) + M0 <= 0`` up to solver tolerance,
    ``fails`` a cone element with ``tr(M0 V) > 0``.
    """
    params = params or SolverParams()
    if not is_controllable(sys):
        raise DomainError(
            "non-strict KYP test needs (A, B) controllable; for uncontrollable systems "
            "the LMI may fail while the gain bound holds"
        )
    s = _scaled(sys, gamma)
    r = hinf_primal(s, params)
    if not r.optimal:
        return KypResult("inconclusive", r.mu_inf)
    M0 = s.output_weight() - w_selector(s)
    if r.mu_inf <= 1.0 + decision_band(r.mu_inf, params):
        d = hinf_dual(s, params)
        if d.P is None:
            return KypResult("inconclusive", r.mu_inf)
        top = max_eig(kyp_matrix(s, d.P) + M0)
        return KypResult("holds", r.mu_inf, P=d.P, lmi_max_eig=top)
    val = float(np.real(np.trace(M0 @ r.V_opt.V)))
    return KypResult("fails", r.mu_inf, V_cert=r.V_opt, certificate_value=val)


def kyp_alternatives(sys: StateSpace, params: SolverParams | None = None):
    """Run both sides of the strict-KYP alternative independently.

    Returns a dict with ``P_valid`` (an LMI certificate with margin delta
    was found) and ``V_valid`` (a nonzero cone element with
    ``tr(M0 V) >= 0`` was found). At most one can be true.
    """
    params = params or SolverParams()
    delta = strictness_margin(sys.A, sys.B, sys.C, sys.D)
    M0 = sys.output_weight() - w_selector(sys)
    P, _ = strict_margin_P(sys, params)
    P_top = max_eig(kyp_matrix(sys, P) + M0) if P is not None else float("nan")
    L = StateBalance.of(sys).state_map()
    P_cert = congruent_max_eig(kyp_matrix(sys, P) + M0, L) if P is not None else float("nan")
    r = hinf_primal(sys, params, check_dual=False)
    V_val = float(np.real(np.trace(M0 @ r.V_opt.V))) if r.optimal else float("nan")
    return {
        "P_valid": bool(P is not None and P_cert <= -delta),
        "V_valid": bool(r.optimal and V_val >= 0.0),
        "P_max_eig": P_top,
        "V_value": V_val,
        "mu_inf": r.mu_inf,
    }
