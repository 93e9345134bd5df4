"""The cone of gramians ``C = {V >= 0 : [A B] V [A B]^* = [I 0] V [I 0]^*}``.

``V = [[X, R], [R^*, W]]`` is partitioned by state dimension ``n`` and
input dimension ``m``. Every gramian of a finite-energy input lies in
``C`` and ``C`` is the closure of that set; rank-one elements correspond to
single-frequency excitations ``e^{j theta} x_s = A x_s + B w_s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import DomainError
from .linalg import dlyap, hermitian_part, min_eig
from .oracles import Signal, gramian_exact
from .system import StateSpace

PSD_TOL = 1e-8
MEMBER_TOL = 1e-9
RANK_TOL = 1e-9
CTRB_TOL = 1e-9
PHASE_MERGE = 1e-8


@dataclass(frozen=True, eq=False)
class GramianMatrix:
    V: np.ndarray
    n: int
    m: int

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=complex))
        d = self.n + self.m
        if V.shape != (d, d):
            raise DomainError(f"gramian must be {d}x{d}, got {V.shape}")
        if not np.all(np.isfinite(V)):
            raise DomainError("gramian has non-finite entries")
        if np.linalg.norm(V - V.conj().T) > 1e-8 * (1.0 + np.linalg.norm(V)):
            raise DomainError("gramian is not Hermitian")
        V = hermitian_part(V)
        lo = min_eig(V)
        if lo < -PSD_TOL * (1.0 + np.linalg.norm(V)):
            raise DomainError(f"gramian is not positive semidefinite (min eigenvalue {lo:.3g})")
        object.__setattr__(self, "V", V)

    @classmethod
    def for_system(cls, V, sys):
        return cls(V, sys.n, sys.m)

    @property
    def X(self):
        return self.V[: self.n, : self.n]

    @property
    def R(self):
        return self.V[: self.n, self.n:]

    @property
    def W(self):
        return self.V[self.n:, self.n:]

    def __array__(self, dtype=None, copy=None):
        return self.V if dtype is None else self.V.astype(dtype)


def _matrix(V):
    return V.V if isinstance(V, GramianMatrix) else np.asarray(V, dtype=complex)


def _check_dims(V, sys):
    d = sys.n + sys.m
    if V.shape != (d, d):
        raise DomainError(f"gramian is {V.shape}, system needs {(d, d)}")


def stationarity_map(V, sys):
    """``[A B] V [A B]^* - X``; zero exactly on the cone's subspace."""
    V = _matrix(V)
    _check_dims(V, sys)
    AB = np.hstack([sys.A, sys.B])
    return AB @ V @ AB.conj().T - V[: sys.n, : sys.n]


def membership_residual(V, sys):
    """Return ``(||[A B] V [A B]^* - X||_F, lambda_min(V))``."""
    V = _matrix(V)
    return float(np.linalg.norm(stationarity_map(V, sys))), min_eig(V)


def in_cone(V, sys, tol=MEMBER_TOL):
    """Membership with both tests relative to ``1 + ||V||_F``."""
    V = _matrix(V)
    res, lo = membership_residual(V, sys)
    scale = 1.0 + np.linalg.norm(V)
    return bool(res <= tol * scale and lo >= -tol * scale)


def controllability_gramian(sys):
    return dlyap(sys.A, sys.B @ sys.B.conj().T)


def controllable_basis(sys, tol=CTRB_TOL):
    """Orthonormal basis of the reachable subspace, from the controllability gramian."""
    if sys.n == 0:
        return np.zeros((0, 0), dtype=complex)
    Wc = controllability_gramian(sys)
    lam, U = np.linalg.eigh(Wc)
    cut = tol * max(np.trace(Wc).real / sys.n, 1e-300)
    if np.trace(Wc).real <= 0:
        return np.zeros((sys.n, 0), dtype=complex)
    return U[:, lam > cut]


def is_controllable(sys, tol=CTRB_TOL):
    """``lambda_min(W_c) > tol * tr(W_c) / n`` for ``W_c = dlyap(A, B B^*)``."""
    if sys.n == 0:
        return True
    Wc = controllability_gramian(sys)
    tr = np.trace(Wc).real
    return bool(tr > 0 and min_eig(Wc) > tol * tr / sys.n)


class ConeVariable:
    """A gramian variable constrained to ``C``, added to a conic program.

    For uncontrollable ``(A, B)`` the state block is posed in coordinates of
    the reachable subspace: every element of ``C`` has ``X`` supported
    there (for ``y`` orthogonal to it, ``y^* X y = (A^* y)^* X (A^* y)``,
    which iterates to zero). The reduced program is equivalent and keeps
    a strictly feasible point, so the splitting solver converges normally.
    """

    def __init__(self, prog, sys: StateSpace, reduce=None):
        self.sys = sys
        n, m = sys.n, sys.m
        if reduce is None:
            reduce = not is_controllable(sys)
        T = controllable_basis(sys) if reduce else np.eye(n, dtype=complex)
        self.T = T
        self.nc = T.shape[1]
        self.reduced = reduce
        self.L = np.zeros((n + m, self.nc + m), dtype=complex)
        self.L[:n, : self.nc] = T
        self.L[n:, self.nc:] = np.eye(m)
        self.handle = prog.add_psd(self.nc + m)
        Ac = T.conj().T @ sys.A @ T
        Bc = T.conj().T @ sys.B
        Phi = np.hstack([Ac, Bc])
        Gam = np.hstack([np.eye(self.nc), np.zeros((self.nc, m))])
        self.subspace_rows = []
        if self.nc:
            self.subspace_rows = prog.add_hermitian_equality(
                np.zeros((self.nc, self.nc)),
                congruences=[(self.handle, Phi, 1.0), (self.handle, Gam, -1.0)],
            )

    def coef(self, G):
        """Pull back a coefficient matrix on the full ``V`` to the program's block."""
        G = np.asarray(G, dtype=complex)
        return self.L.conj().T @ G @ self.L

    def congruence(self, M):
        """``M V M^*`` expressed on the program's block: returns ``M L``."""
        return np.asarray(M, dtype=complex) @ self.L

    def lift(self, Vc):
        return hermitian_part(self.L @ Vc @ self.L.conj().T)

    def multiplier(self, duals):
        """Hermitian multiplier of the stationarity constraint, in full coordinates."""
        from .linalg import herm_from_coords

        if not self.nc:
            return np.zeros((self.sys.n, self.sys.n), dtype=complex)
        Pc = herm_from_coords(duals[self.subspace_rows], self.nc)
        return self.T @ Pc @ self.T.conj().T

    def w_selector(self):
        E = np.zeros((self.nc + self.sys.m,) * 2)
        E[self.nc:, self.nc:] = np.eye(self.sys.m)
        return E


@dataclass(frozen=True)
class RankOneComponent:
    """``v = [x_s; w_s]`` with ``e^{j theta} x_s = A x_s + B w_s``; contributes ``v v^*``."""

    x_s: np.ndarray
    w_s: np.ndarray
    theta: float

    @property
    def vector(self):
        return np.concatenate([self.x_s, self.w_s])

    @property
    def weight(self):
        return float(np.vdot(self.vector, self.vector).real)

    def matrix(self):
        v = self.vector
        return np.outer(v, v.conj())

    def eigen_residual(self, sys):
        """``||e^{j theta} x_s - (A x_s + B w_s)||_2``."""
        return float(np.linalg.norm(np.exp(1j * self.theta) * self.x_s - sys.A @ self.x_s - sys.B @ self.w_s))


def reconstruct(components, n, m):
    V = np.zeros((n + m, n + m), dtype=complex)
    for c in components:
        V += c.matrix()
    return V


def _cluster_phases(theta, tol=PHASE_MERGE):
    """Snap phases that agree within ``tol`` (on the circle) to their common mean."""
    theta = np.mod(theta, 2 * np.pi)
    order = np.argsort(theta)
    out = theta.copy()
    groups, cur = [], [order[0]] if len(order) else []
    for a, b in zip(order[:-1], order[1:]):
        if theta[b] - theta[a] <= tol:
            cur.append(b)
        else:
            groups.append(cur)
            cur = [b]
    if cur:
        groups.append(cur)
    if len(groups) > 1 and (theta[groups[0][0]] + 2 * np.pi - theta[groups[-1][-1]]) <= tol:
        groups[0] = groups.pop() + groups[0]
    for g in groups:
        z = np.mean(np.exp(1j * theta[g]))
        out[g] = np.mod(np.angle(z), 2 * np.pi)
    return out


def rank_one_decompose(V, sys, rank_tol=RANK_TOL, member_tol=1e-6):
    """Split ``V`` in ``C`` into rank-one elements of ``C``.

    Factor ``V = T T^*``, match ``[A B] T = [I 0] T U`` with a unitary ``U``
    (Procrustes on ``([I 0] T)^* [A B] T``; any unitary completion on the
    null space works), then diagonalise ``U``. Each Schur vector ``z`` of
    ``U`` with eigenvalue ``e^{j theta}`` yields the component ``T z``.
    Components are returned in descending weight; they re-sum to ``V`` up to
    the eigenvalue truncation at ``rank_tol * lambda_max``.
    """
    V = _matrix(V)
    _check_dims(V, sys)
    n, m = sys.n, sys.m
    res, lo = membership_residual(V, sys)
    scale = 1.0 + np.linalg.norm(V)
    if res > member_tol * scale or lo < -member_tol * scale:
        raise DomainError(
            f"V is not in the cone: stationarity residual {res:.3e}, min eigenvalue {lo:.3e}"
        )
    lam, Uv = np.linalg.eigh(hermitian_part(V))
    if lam[-1] <= 0:
        return []
    keep = lam >= rank_tol * lam[-1]
    T = Uv[:, keep] * np.sqrt(lam[keep])
    F = np.hstack([sys.A, sys.B]) @ T
    G = T[:n]
    P, _, Qh = np.linalg.svd(G.conj().T @ F)
    U = P @ Qh
    Tu, Z = schur(U, output="complex")
    phases = _cluster_phases(np.angle(np.diag(Tu)))
    comps = []
    for k in range(Z.shape[1]):
        v = T @ Z[:, k]
        # fix the free unit phase: largest input entry (else state entry) real positive
        lead = v[n:] if np.linalg.norm(v[n:]) > 1e-12 * np.linalg.norm(v) else v[:n]
        if lead.size and np.abs(lead).max() > 0:
            a = lead[np.argmax(np.abs(lead))]
            v = v * (abs(a) / a)
        comps.append(RankOneComponent(v[:n].copy(), v[n:].copy(), float(phases[k])))
    comps.sort(key=lambda c: -c.weight)
    return comps


def random_cone_element(sys, seed=0, signals=2, sinusoids=1, length=6):
    """Random element of ``C`` normalised to unit trace.

    Mixes the exact gramians of random finite inputs, rank-one sinusoidal
    elements and ``diag(W_c, I)``; the stationarity residual is at rounding
    level by construction.
    """
    if not is_controllable(sys):
        raise DomainError("random cone elements are drawn for controllable (A, B) only")
    rng = np.random.default_rng(seed)
    n, m = sys.n, sys.m

    def cgauss(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    V = rng.uniform(0.2, 1.0) * np.block(
        [[controllability_gramian(sys), np.zeros((n, m))], [np.zeros((m, n)), np.eye(m)]]
    )
    for _ in range(signals):
        V = V + rng.uniform(0.2, 1.0) * gramian_exact(sys, Signal(cgauss(length, m)))
    for _ in range(sinusoids):
        th = rng.uniform(0, 2 * np.pi)
        ws = cgauss(m)
        xs = np.linalg.solve(np.exp(1j * th) * np.eye(n) - sys.A, sys.B @ ws)
        v = np.concatenate([xs, ws])
        V = V + rng.uniform(0.2, 1.0) * np.outer(v, v.conj())
    V = hermitian_part(V)
    return GramianMatrix(V / np.trace(V).real, n, m)


@dataclass(frozen=True, eq=False)
class StateBalance:
    """Similarity ``x = T x~`` with ``W_c(A~, B~) = I``; identity when uncontrollable.

    Inputs and outputs are untouched, so ``(z, w)`` quantities agree between
    the two realisations. Gramians map as ``V = L V~ L^*`` with
    ``L = diag(T, I)`` and KYP multipliers as ``P = T^{-*} P~ T^{-1}``.
    """

    sys: StateSpace
    balanced: StateSpace
    T: np.ndarray

    @classmethod
    def of(cls, sys, tol=CTRB_TOL):
        if sys.n == 0 or not is_controllable(sys, tol):
            return cls(sys, sys, np.eye(sys.n, dtype=complex))
        lam, U = np.linalg.eigh(controllability_gramian(sys))
        T = U * np.sqrt(lam)
        Ti = (U / np.sqrt(lam)).conj().T
        sb = StateSpace(Ti @ sys.A @ T, Ti @ sys.B, sys.C @ T, sys.D)
        return cls(sys, sb, T)

    def state_map(self):
        """``L = diag(T, I)``."""
        L = np.eye(self.sys.n + self.sys.m, dtype=complex)
        L[: self.sys.n, : self.sys.n] = self.T
        return L

    def V_back(self, Vb):
        L = self.state_map()
        return hermitian_part(L @ np.asarray(Vb) @ L.conj().T)

    def P_back(self, Pb):
        Ti = np.linalg.inv(self.T)
        return hermitian_part(Ti.conj().T @ np.asarray(Pb) @ Ti)
