"""Finite-support inputs whose gramian approximates a given cone element.

A rank-one element ``v v^*`` with ``e^{j theta} x_s = A x_s + B w_s`` is
approached by the windowed sinusoid ``w_k = e^{j theta k} w_s / sqrt(N)``,
``0 <= k < N``: the state is the steady-state sinusoid minus a transient
``A^k x_s / sqrt(N)``, so the gramian error is ``O(1/N)`` while
``sum_k w_k w_k^* = w_s w_s^*`` holds exactly. A general element is split
into rank-one parts whose windows are played one after another, separated
by silent gaps long enough for the previous response to die out.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cone import GramianMatrix, RankOneComponent, in_cone, membership_residual, rank_one_decompose
from .errors import DomainError, SolverFailure
from .linalg import matrix_power_norms
from .oracles import Signal, gramian_exact, simulate
from .system import StateSpace

MAX_WINDOW = 2**24
W_EXACT_TOL = 1e-10
SYNTH_RANK_TOL = 1e-15


@dataclass(frozen=True)
class BoundConstants:
    C: float  # sum_k 2 ||A^k|| + ||A^k||^2
    C1: float  # sum_k ||A^k||^2
    S1: float  # sum_k ||A^k||


def error_bound_constants(sys: StateSpace, tail_tol=1e-12):
    """Sums of powers of ``||A^k||_2`` used by the rank-one error bound.

    Terms are summed until ``||A^k|| < 1e-16``; the remainder is then bounded
    by a geometric tail with the last observed ratio, which must be below
    ``tail_tol`` relative to the sum.
    """
    a = matrix_power_norms(sys.A)
    S1, C1 = float(a.sum()), float((a**2).sum())
    if len(a) > 1 and a[-2] > 0:
        r = min(a[-1] / a[-2], 0.999999)
        tail1 = a[-1] * r / (1 - r)
        if tail1 > tail_tol * S1:
            raise SolverFailure("power-norm series converges too slowly for the requested accuracy")
        S1 += tail1
        C1 += a[-1] ** 2 * r**2 / (1 - r**2)
    return BoundConstants(C=2 * S1 + C1, C1=C1, S1=S1)


def rank_one_bound(comp: RankOneComponent, sys: StateSpace, N, constants=None):
    """Analytic bound ``C3 / N`` on the Frobenius gramian error of :func:`synth_rank_one`.

    Transient cross terms give ``C ||x_s|| ||v|| / N`` and the free response
    after the window ``C1 (1 + ||A^N||)^2 ||x_s||^2 / N``.
    """
    k = constants or error_bound_constants(sys)
    xs = np.linalg.norm(comp.x_s)
    v = np.linalg.norm(comp.vector)
    AN = np.linalg.norm(np.linalg.matrix_power(sys.A, int(N)), 2) if sys.n else 0.0
    return (k.C * xs * v + k.C1 * (1.0 + AN) ** 2 * xs**2) / N


def synth_rank_one(comp: RankOneComponent, sys: StateSpace, N: int) -> Signal:
    """``w_k = e^{j theta k} w_s / sqrt(N)`` for ``0 <= k < N``."""
    N = int(N)
    if N < 1:
        raise DomainError("window length must be at least 1")
    if comp.w_s.shape[0] != sys.m:
        raise DomainError(f"component has {comp.w_s.shape[0]} input channels, system has {sys.m}")
    k = np.arange(N)
    phase = np.exp(1j * comp.theta * k)
    return Signal(phase[:, None] * comp.w_s[None, :] / np.sqrt(N))


def rank_one_error(comp, sys, N):
    w = synth_rank_one(comp, sys, N)
    return float(np.linalg.norm(gramian_exact(sys, w) - comp.matrix())), w


def choose_window(comp: RankOneComponent, sys: StateSpace, target_err, cap=MAX_WINDOW):
    """Smallest power of two ``N`` whose simulated rank-one error is below ``target_err``."""
    if not target_err > 0:
        raise DomainError("target error must be positive")
    N = 1
    while True:
        err, _ = rank_one_error(comp, sys, N)
        if err < target_err:
            return N
        if N >= cap:
            raise SolverFailure(
                f"window length would exceed {cap} (error {err:.3g} vs target {target_err:.3g}); "
                f"spectral radius {sys.rho:.6f} may be too close to 1"
            )
        N *= 2


def _settling_gap(sys, x, limit, cap=MAX_WINDOW):
    """Steps of free response until ``||A^g x|| <= limit``."""
    g = 0
    while np.linalg.norm(x) > limit:
        if g >= cap:
            raise SolverFailure("free response did not settle; spectral radius too close to 1?")
        x = sys.A @ x
        g += 1
    return g


@dataclass
class SynthesisReport:
    achieved_error: float
    W_residual: float
    windows: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    support: int = 0
    eps: float = float("nan")
    component_errors: list = field(default_factory=list)
    component_bounds: list = field(default_factory=list)
    thetas: list = field(default_factory=list)
    attempts: int = 1
    correction_samples: int = 0


def _assemble(comps, sys, eps, shrink, constants):
    r = len(comps)
    budget = eps / (4.0 * r) / shrink
    pieces, windows, gaps, errs, bounds = [], [], [], [], []
    x = np.zeros(sys.n, dtype=complex)
    for i, c in enumerate(comps):
        if i:
            # cross term with the previous response is at most 2 sqrt(C1 tr) ||y0||
            tr = max(c.weight, 1e-300)
            limit = budget / (2.0 * np.sqrt(constants.C1 * tr))
            g = _settling_gap(sys, x, limit)
            gaps.append(g)
            pieces.append(np.zeros((g, sys.m), dtype=complex))
            x = np.linalg.matrix_power(sys.A, g) @ x if sys.n else x
        N = choose_window(c, sys, budget)
        err, w = rank_one_error(c, sys, N)
        windows.append(N)
        errs.append(err)
        bounds.append(rank_one_bound(c, sys, N, constants))
        pieces.append(w.samples)
        traj = simulate(sys, w)
        x = np.linalg.matrix_power(sys.A, N) @ x + traj.states[-1] if sys.n else x
    return pieces, windows, gaps, errs, bounds, x


def _w_correction(W_target, W_have):
    """Samples whose gramian is the (PSD part of the) missing ``W_target - W_have``."""
    lam, U = np.linalg.eigh(0.5 * (W_target - W_have + (W_target - W_have).conj().T))
    keep = lam > 0
    return (U[:, keep] * np.sqrt(lam[keep])).T


def synth(V, sys: StateSpace, eps, member_tol=1e-6, max_attempts=4):
    """Finite-support ``w`` with ``||Lambda(Mw, w) - V||_F < eps`` and ``Lambda(w) = W``.

    The error budget is ``eps / (4 r)`` per rank-one window and as much again
    per settling gap, for ``r`` components taken in decreasing weight. The
    result is verified by simulating the assembled signal; if it misses
    ``eps`` the budgets are halved and the assembly repeated.
    Components dropped as numerically zero leave a tiny deficit in ``W``;
    it is made up by a few extra samples after a final settling gap.
    """
    Vm = V.V if isinstance(V, GramianMatrix) else np.asarray(V, dtype=complex)
    if not eps > 0:
        raise DomainError("eps must be positive")
    n, m = sys.n, sys.m
    if Vm.shape != (n + m, n + m):
        raise DomainError(f"gramian is {Vm.shape}, system needs {(n + m, n + m)}")
    if not in_cone(Vm, sys, member_tol):
        res, lo = membership_residual(Vm, sys)
        raise DomainError(
            f"V is not in the cone: stationarity residual {res:.3e}, min eigenvalue {lo:.3e}"
        )
    W = Vm[n:, n:]
    scale = max(np.linalg.norm(Vm), 1e-300)
    comps = [c for c in rank_one_decompose(Vm, sys, rank_tol=SYNTH_RANK_TOL, member_tol=member_tol)
             if c.weight > 1e-16 * scale]
    if not comps:
        w = Signal.zeros(m)
        err = float(np.linalg.norm(Vm))
        if err >= eps:
            raise SolverFailure(f"V is numerically zero in its input part but ||V|| = {err:.3g}")
        return w, SynthesisReport(err, float(np.linalg.norm(W)), eps=eps)
    constants = error_bound_constants(sys)
    shrink = 1.0
    for attempt in range(1, max_attempts + 1):
        pieces, windows, gaps, errs, bounds, x = _assemble(comps, sys, eps, shrink, constants)
        samples = np.vstack(pieces)
        extra = _w_correction(W, samples.T @ samples.conj())
        if extra.shape[0] and np.linalg.norm(extra) ** 2 > 1e-14 * scale:
            g = _settling_gap(sys, x, eps / (8.0 * np.sqrt(constants.C1 * (np.linalg.norm(extra) ** 2 + 1e-300))))
            gaps.append(g)
            samples = np.vstack([samples, np.zeros((g, m), dtype=complex), extra])
        else:
            extra = np.zeros((0, m))
        w = Signal(samples)
        err = float(np.linalg.norm(gramian_exact(sys, w) - Vm))
        w_res = float(np.linalg.norm(w.gramian() - W))
        if err < eps:
            return w, SynthesisReport(
                err, w_res, windows, gaps, len(w), eps, errs, bounds,
                [c.theta for c in comps], attempt, extra.shape[0],
            )
        shrink *= 2.0
    raise SolverFailure(f"synthesis error {err:.3g} still above eps = {eps:.3g} after {max_attempts} attempts")
