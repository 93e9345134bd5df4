"""Worst-case gain under structured knowledge about the disturbance.

Disturbances are described by constraints ``f_i(W) <= 0`` on the input
gramian ``W = sum_k w_k w_k^*``, each ``f_i`` affine from m x m Hermitian
matrices to q_i x q_i Hermitian matrices. The worst-case output energy is

    max tr([C D]^* [C D] V)  s.t.  V in C,  f_i(W) <= 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cone import ConeVariable, GramianMatrix, StateBalance
from .errors import DomainError
from .hinf import (P_PENALTY, _bounded_P, congruent_max_eig, decision_band, kyp_matrix,
                   kyp_terms, max_eig, w_selector)
from .linalg import hermitian_basis, herm_from_coords, hermitian_part
from .maps import AffineMap
from .sdp import (INFEASIBLE, OPTIMAL, UNBOUNDED, ConicProgram, SolverParams, add_lmi,
                  solve, strictness_margin)
from .system import StateSpace


@dataclass(frozen=True, eq=False)
class DisturbanceSpec:
    kind: str
    m: int
    maps: tuple
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.maps:
            raise DomainError("a disturbance spec needs at least one constraint")
        for f in self.maps:
            if f.m != self.m:
                raise DomainError(f"constraint {f.label!r} acts on {f.m} channels, spec has {self.m}")

    def violation(self, W):
        """Largest eigenvalue over all ``f_i(W)`` (<= 0 when W is admissible)."""
        return max(max_eig(f(W)) for f in self.maps)


def _unit(m, i):
    E = np.zeros((m, m))
    E[i, i] = 1.0
    return E


def unit_energy(m):
    I = np.eye(m)
    return DisturbanceSpec("unit_energy", m, (
        AffineMap.scalar(I, -1.0, "tr(W) - 1"),
        AffineMap.scalar(-I, 1.0, "1 - tr(W)"),
    ))


def per_channel(bounds):
    bounds = np.asarray(bounds, dtype=float).ravel()
    if bounds.size == 0 or np.any(bounds < 0) or not np.all(np.isfinite(bounds)):
        raise DomainError("per-channel bounds must be finite and nonnegative")
    m = bounds.size
    maps = tuple(AffineMap.scalar(_unit(m, i), -b, f"W[{i},{i}] - {b:g}") for i, b in enumerate(bounds))
    return DisturbanceSpec("per_channel", m, maps, {"bounds": bounds.tolist()})


def grouped(groups, bounds, m=None):
    groups = [sorted(int(i) for i in g) for g in groups]
    bounds = np.asarray(bounds, dtype=float).ravel()
    if len(groups) != bounds.size:
        raise DomainError(f"{len(groups)} groups but {bounds.size} bounds")
    flat = [i for g in groups for i in g]
    m = int(m) if m is not None else (max(flat) + 1 if flat else 0)
    if sorted(flat) != list(range(m)):
        raise DomainError(f"groups {groups} do not partition channels 0..{m - 1}")
    if np.any(bounds < 0):
        raise DomainError("group bounds must be nonnegative")
    maps = []
    for g, b in zip(groups, bounds):
        G = sum(_unit(m, i) for i in g)
        maps.append(AffineMap.scalar(G, -b, "+".join(f"W[{i},{i}]" for i in g) + f" - {b:g}"))
    return DisturbanceSpec("grouped", m, tuple(maps), {"groups": groups, "bounds": bounds.tolist()})


def principal_component(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.shape[0] != M.shape[1] or np.linalg.norm(M - M.conj().T) > 1e-12 * (1 + np.linalg.norm(M)):
        raise DomainError("principal-component bound must be a Hermitian matrix")
    m = M.shape[0]
    f = AffineMap.from_linear(lambda W: W, m, m, -hermitian_part(M), "W - M")
    return DisturbanceSpec("principal_component", m, (f,), {"M": M})


def custom(maps, m=None):
    maps = tuple(maps)
    if not maps:
        raise DomainError("a disturbance spec needs at least one constraint")
    return DisturbanceSpec("custom", m if m is not None else maps[0].m, maps)


def build_spec(kind, m=None, **params):
    """Construct a spec by name: ``unit_energy``, ``per_channel``, ``grouped``,
    ``principal_component`` or ``custom``."""
    kind = kind.lower()
    if kind == "unit_energy":
        if m is None:
            raise DomainError("unit_energy needs m")
        return unit_energy(int(m))
    if kind == "per_channel":
        bounds = params.get("bounds")
        if bounds is None:
            bounds = np.ones(int(m))
        spec = per_channel(bounds)
    elif kind == "grouped":
        spec = grouped(params["groups"], params["bounds"], m)
    elif kind == "principal_component":
        spec = principal_component(params["M"])
    elif kind == "custom":
        spec = custom(params["maps"], m)
    else:
        raise DomainError(f"unknown disturbance kind {kind!r}")
    if m is not None and spec.m != m:
        raise DomainError(f"spec describes {spec.m} channels, expected {m}")
    return spec


def _add_constraint(prog, embed, f):
    """``f(W) + S = 0`` with ``S`` PSD (nonneg scalar when q = 1); returns (slack, rows)."""
    if f.q == 1:
        S = prog.add_nonneg(1)
        rows = [prog.add_equality({**embed(f.coef[0]), S: [1.0]}, -float(np.real(f.const[0, 0])))]
        return S, rows
    S = prog.add_psd(f.q)
    rows = []
    for k, E in enumerate(hermitian_basis(f.q)):
        rows.append(prog.add_equality({**embed(f.coef[k]), S: E},
                                      -float(np.real(np.trace(E @ f.const)))))
    return S, rows


@dataclass
class ExtResult:
    status: str
    value: float
    V_opt: GramianMatrix | None = None
    multipliers: list = field(default_factory=list)
    violation: float = float("nan")
    message: str = ""


def _bounded_energy(spec, params):
    """Largest ``tr W`` over ``W >= 0`` admissible for the spec."""
    prog = ConicProgram("max")
    W = prog.add_psd(spec.m)
    for f in spec.maps:
        _add_constraint(prog, lambda G: {W: G}, f)
    prog.set_objective({W: np.eye(spec.m)})
    return solve(prog, params)


def ext_hinf_primal(sys: StateSpace, spec: DisturbanceSpec, params: SolverParams | None = None):
    """Worst-case output energy over gramians admissible for ``spec``.

    A small pre-solve checks that the spec bounds the input energy; if not
    the result has status ``"unbounded-detected"`` and an explanation.
    ``multipliers`` are the raw constraint multipliers ``Y_i >= 0``.
    """
    params = params or SolverParams()
    if spec.m != sys.m:
        raise DomainError(f"spec has {spec.m} channels, system has {sys.m} inputs")
    pre = _bounded_energy(spec, params)
    if pre.status == UNBOUNDED:
        return ExtResult(UNBOUNDED, float("inf"),
                         message="the constraints do not bound tr(W): the worst-case energy is infinite")
    if pre.status == INFEASIBLE:
        return ExtResult(INFEASIBLE, float("nan"), message="no input gramian satisfies the constraints")
    if pre.status != OPTIMAL:
        return ExtResult(pre.status, float("nan"), message="energy-bound pre-check did not converge")
    bal = StateBalance.of(sys)
    prog = ConicProgram("max")
    cv = ConeVariable(prog, bal.balanced)
    n, m = sys.n, sys.m

    def embed(G):
        full = np.zeros((n + m, n + m), dtype=complex)
        full[n:, n:] = G
        return {cv.handle: cv.coef(full)}

    rows = [_add_constraint(prog, embed, f)[1] for f in spec.maps]
    prog.set_objective({cv.handle: cv.coef(bal.balanced.output_weight())})
    sol = solve(prog, params)
    if sol.status != OPTIMAL:
        return ExtResult(sol.status, float("nan"), message="solver did not reach optimality")
    V = GramianMatrix.for_system(bal.V_back(cv.lift(sol.values[cv.handle])), sys)
    mult = []
    for f, r in zip(spec.maps, rows):
        y = sol.duals[r]
        mult.append(float(y[0]) if f.q == 1 else herm_from_coords(y, f.q))
    return ExtResult(OPTIMAL, float(sol.primal_objective), V, mult, spec.violation(V.W))


@dataclass
class SquareDualResult:
    status: str  # "holds" | "fails" | "inconclusive"
    P: np.ndarray | None = None
    Y: np.ndarray | None = None
    lmi_max_eig: float = float("nan")
    value: float = float("nan")
    V_cert: GramianMatrix | None = None

    @property
    def holds(self):
        return {"holds": True, "fails": False}.get(self.status)


def square_lmi(sys, P, y):
    """``K(P) + [C D]^*[C D] - diag(0, diag(y))``."""
    n, m = sys.n, sys.m
    Y = np.zeros((n + m, n + m))
    Y[n:, n:] = np.diag(np.asarray(y, dtype=float))
    return kyp_matrix(sys, P) + sys.output_weight() - Y


def square_certificate_valid(sys, P, y, delta=None, congruence=None):
    """Check ``y >= 0``, ``sum y < 1``, and the LMI with strict margin ``delta``
    (after the congruence ``L^* . L`` when given)."""
    delta = strictness_margin(sys.A, sys.B, sys.C, sys.D) if delta is None else delta
    y = np.asarray(y, dtype=float)
    top = congruent_max_eig(square_lmi(sys, P, y), congruence)
    return bool(np.all(y >= 0) and y.sum() < 1.0 and top <= -delta)


def square_hinf_dual_check(sys: StateSpace, params: SolverParams | None = None):
    """Decide whether every input with ``||w_i||^2 <= 1`` per channel gives ``||z||^2 < 1``.

    Searches for diagonal ``Y >= 0`` with ``tr Y < 1`` and ``P`` making
    :func:`square_lmi` negative definite; otherwise compares against the
    per-channel primal value and returns its gramian when the value
    exceeds 1.
    """
    params = params or SolverParams()
    n, m = sys.n, sys.m
    delta = strictness_margin(sys.A, sys.B, sys.C, sys.D)
    prog = ConicProgram("max")
    P, t = _bounded_P(prog, n)
    y = prog.add_nonneg(m)
    s = prog.add_free(1)
    Ey = np.zeros((m, n + m, n + m))
    for i in range(m):
        Ey[i, n + i, n + i] = -1.0
    bal = StateBalance.of(sys)
    sb = bal.balanced
    add_lmi(prog, sb.output_weight(), linear=[(P, kyp_terms(sb)), (y, Ey)], margin=s)
    # 1 - sum(y) - s >= 0
    r = prog.add_nonneg(1)
    prog.add_equality({y: np.ones(m), s: [1.0], r: [1.0]}, 1.0)
    prog.set_objective({s: [1.0], t: [-P_PENALTY]})
    sol = solve(prog, params)
    if sol.optimal:
        Pm = bal.P_back(herm_from_coords(sol.values[P], n))
        yv = np.maximum(sol.values[y], 0.0)
        if square_certificate_valid(sys, Pm, yv, delta, bal.state_map()):
            return SquareDualResult("holds", Pm, np.diag(yv), max_eig(square_lmi(sys, Pm, yv)))
    ext = ext_hinf_primal(sys, per_channel(np.ones(m)), params)
    if ext.status == OPTIMAL and ext.value > 1.0 + decision_band(ext.value, params):
        return SquareDualResult("fails", value=ext.value, V_cert=ext.V_opt)
    return SquareDualResult("inconclusive", value=ext.value)
