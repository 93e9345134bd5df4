"""Independent ground truth: simulation, gramian accumulation, frequency grid.

Nothing in this module touches the conic solver.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SolverFailure
from .linalg import dlyap, hermitian_part
from .system import StateSpace


@dataclass(frozen=True, eq=False)
class Signal:
    """Finite-support sequence of C^m vectors; samples past ``len`` are zero."""

    samples: np.ndarray  # (L, m)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2:
            raise DomainError(f"signal samples must be (L, m), got {s.shape}")
        object.__setattr__(self, "samples", s)

    @classmethod
    def zeros(cls, m, length=0):
        return cls(np.zeros((length, m), dtype=complex))

    @property
    def m(self):
        return self.samples.shape[1]

    def __len__(self):
        return self.samples.shape[0]

    def gramian(self):
        """``sum_k w_k w_k^*``."""
        s = self.samples
        return hermitian_part(s.T @ s.conj())

    def energy(self):
        return float(np.sum(np.abs(self.samples) ** 2))

    def concat(self, *others):
        return Signal(np.vstack([self.samples] + [o.samples for o in others]))

    def padded(self, extra):
        return Signal(np.vstack([self.samples, np.zeros((extra, self.m), dtype=complex)]))


@dataclass(frozen=True, eq=False)
class Trajectory:
    sys: StateSpace
    states: np.ndarray  # (K+1, n): x_0 .. x_K
    inputs: np.ndarray  # (K, m): w_0 .. w_{K-1}, zero past the signal support
    outputs: np.ndarray  # (K, p)

    @property
    def horizon(self):
        return self.inputs.shape[0]


def simulate(sys: StateSpace, w: Signal, extra_settle=0):
    """Run ``x[k+1] = A x[k] + B w[k]`` from ``x[0] = 0``.

    The horizon is ``len(w) + extra_settle`` steps; states has one more row
    than the horizon (the state after the last input).
    """
    if w.m != sys.m:
        raise DomainError(f"signal has {w.m} channels, system expects {sys.m}")
    K = len(w) + int(extra_settle)
    W = np.zeros((K, sys.m), dtype=complex)
    W[: len(w)] = w.samples
    A = sys.A
    BW = W @ sys.B.T
    X = np.zeros((K + 1, sys.n), dtype=complex)
    x = X[0]
    for k in range(K):
        x = A @ x + BW[k]
        X[k + 1] = x
    Z = X[:-1] @ sys.C.T + W @ sys.D.T
    return Trajectory(sys, X, W, Z)


def _power_norm_square_sum(A, tol=1e-16, cap=10**6):
    """``sum_k ||A^k||_2^2``, truncated when the geometric tail bound drops below ``tol``."""
    n = A.shape[0]
    P = np.eye(n, dtype=complex)
    total, prev = 0.0, None
    for k in range(cap):
        a = np.linalg.norm(P, 2) ** 2 if n else 0.0
        total += a
        if prev is not None and prev > 0:
            r = a / prev
            if r < 1 and a * r / (1 - r) < tol * max(total, 1.0):
                return total
        if a < tol * 1e-3 * max(total, 1.0):
            return total
        prev = a
        P = A @ P
    raise SolverFailure("matrix power series did not converge; spectral radius near 1?")


def _joint(states, inputs):
    return np.hstack([states, inputs])


def gramian_of(traj: Trajectory, tail_tol=1e-12, max_horizon=10**7, chunk=1024):
    """Gramian ``sum_k [x_k; w_k][x_k; w_k]^*`` of a finite-input trajectory.

    The free response after the input ends is simulated further until the
    tail estimate ``||x_end||^2 * sum_k ||A^k||^2`` is below ``tail_tol``.
    """
    sys = traj.sys
    U = _joint(traj.states[:-1], traj.inputs)
    V = U.T @ U.conj()
    x = traj.states[-1].copy()
    c1 = _power_norm_square_sum(sys.A)
    steps = traj.horizon
    A = sys.A
    zeros = np.zeros((chunk, sys.m), dtype=complex)
    while np.vdot(x, x).real * c1 >= tail_tol:
        if steps >= max_horizon:
            raise SolverFailure(
                f"gramian tail did not decay within {max_horizon} steps "
                f"(||x_end|| = {np.linalg.norm(x):.3g}, rho = {sys.rho:.6f})"
            )
        Xs = np.empty((chunk, sys.n), dtype=complex)
        for i in range(chunk):
            Xs[i] = x
            x = A @ x
        Uc = _joint(Xs, zeros)
        V += Uc.T @ Uc.conj()
        steps += chunk
    return hermitian_part(V)


def gramian_exact(sys: StateSpace, w: Signal):
    """Gramian of ``(Mw, w)`` with the free-response tail in closed form.

    After the support ends the state decays as ``A^k x_L``, whose gramian is
    the Lyapunov solution ``dlyap(A, x_L x_L^*)``.
    """
    traj = simulate(sys, w)
    U = _joint(traj.states[:-1], traj.inputs)
    V = U.T @ U.conj()
    xL = traj.states[-1]
    V[: sys.n, : sys.n] += dlyap(sys.A, np.outer(xL, xL.conj()))
    return hermitian_part(V)


def transfer_function(sys: StateSpace, theta, method="solve"):
    """``G(e^{j theta}) = C (e^{j theta} I - A)^{-1} B + D`` for an array of angles."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    z = np.exp(1j * theta)
    n = sys.n
    if method == "solve":
        M = z[:, None, None] * np.eye(n) - sys.A[None]
        Bb = np.broadcast_to(sys.B, (len(theta),) + sys.B.shape)
        X = np.linalg.solve(M, Bb)
    elif method == "eig":
        lam, S = np.linalg.eig(sys.A)
        SiB = np.linalg.solve(S, sys.B)
        X = S[None] @ (SiB[None] / (z[:, None] - lam[None, :])[:, :, None])
    else:
        raise ValueError(f"unknown method {method!r}")
    return sys.C[None] @ X + sys.D[None]


@dataclass(frozen=True)
class FreqGridResult:
    lower: float
    argmax_theta: float
    grid_points: int


def freq_grid_hinf(sys: StateSpace, grid_points=10_000):
    """Lower bound on the squared H-infinity norm from a uniform grid on the circle.

    Angles ``2 pi k / grid_points``; the bound is ``max_k sigma_max(G)^2``.
    Nested grids (doubling ``grid_points``) give nondecreasing bounds.
    """
    if grid_points < 2:
        raise DomainError("grid needs at least 2 points")
    theta = 2 * np.pi * np.arange(grid_points) / grid_points
    if sys.n:
        z = np.exp(1j * theta)
        M = z[:, None, None] * np.eye(sys.n) - sys.A[None]
        smin = np.linalg.svd(M, compute_uv=False)[:, -1].min()
        if smin < 1e-8:
            warnings.warn(f"resolvent nearly singular on the grid (sigma_min {smin:.2e})", stacklevel=2)
    G = transfer_function(sys, theta)
    s = np.linalg.svd(G, compute_uv=False)[:, 0]
    k = int(np.argmax(s))
    return FreqGridResult(float(s[k] ** 2), float(theta[k]), int(grid_points))
