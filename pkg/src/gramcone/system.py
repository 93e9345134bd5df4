"""Discrete-time complex LTI models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import as_matrix, spectral_radius


@dataclass(frozen=True, eq=False)
class StateSpace:
    """``x[k+1] = A x[k] + B w[k]``, ``z[k] = C x[k] + D w[k]``, ``x[0] = 0``.

    Schur stability of ``A`` is enforced unless ``allow_unstable`` is set
    (only the simulation oracle accepts such models).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    allow_unstable: bool = False

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DomainError(f"A must be square, got {A.shape}")
        B = np.asarray(self.B, dtype=complex)
        if B.ndim < 2:
            B = B.reshape(n, -1) if B.size else np.zeros((n, 1), dtype=complex)
        B = as_matrix(B, "B")
        m = B.shape[1]
        C = np.asarray(self.C, dtype=complex)
        if C.ndim < 2:
            C = C.reshape(-1, n)
        C = as_matrix(C, "C")
        p = C.shape[0]
        D = np.asarray(self.D, dtype=complex)
        if D.ndim < 2:
            D = D.reshape(p, m)
        D = as_matrix(D, "D")
        if B.shape[0] != n or C.shape[1] != n or D.shape != (p, m):
            raise DomainError(
                f"inconsistent dimensions: A {A.shape}, B {B.shape}, C {C.shape}, D {D.shape}"
            )
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D)):
            M.setflags(write=False)
            object.__setattr__(self, name, M)
        if not self.allow_unstable and spectral_radius(A) >= 1.0:
            raise DomainError(f"A is not Schur stable (spectral radius {spectral_radius(A):.6g})")

    @classmethod
    def scalar(cls, a, b, c, d, **kw):
        return cls(np.array([[a]]), np.array([[b]]), np.array([[c]]), np.array([[d]]), **kw)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def rho(self):
        return spectral_radius(self.A)

    def output_weight(self):
        """``[C D]* [C D]``: the quadratic form giving ``||z||^2 = tr(. V)``."""
        CD = np.hstack([self.C, self.D])
        return CD.conj().T @ CD

    def io_map(self):
        """``[[C, D], [0, I]]``, mapping ``(x, w)`` to ``(z, w)``."""
        top = np.hstack([self.C, self.D])
        bot = np.hstack([np.zeros((self.m, self.n)), np.eye(self.m)])
        return np.vstack([top, bot])

    def scaled(self, gamma):
        """Same dynamics with the output scaled by ``gamma``."""
        return StateSpace(self.A, self.B, gamma * self.C, gamma * self.D, self.allow_unstable)

    def input_output_scaled(self, Tin, Tout):
        """``Tout G Tin``: input map ``Tin`` (m x m), output map ``Tout`` (p x p)."""
        Tin = np.asarray(Tin, dtype=complex)
        Tout = np.asarray(Tout, dtype=complex)
        return StateSpace(self.A, self.B @ Tin, Tout @ self.C, Tout @ self.D @ Tin, self.allow_unstable)

    def data_norm(self):
        return float(np.sqrt(sum(np.linalg.norm(M) ** 2 for M in (self.A, self.B, self.C, self.D))))

    def __repr__(self):
        return f"StateSpace(n={self.n}, m={self.m}, p={self.p}, rho={self.rho:.4g})"


def block_diag_systems(*systems):
    """Parallel (decoupled) interconnection of several systems."""
    from scipy.linalg import block_diag

    return StateSpace(
        block_diag(*[s.A for s in systems]),
        block_diag(*[s.B for s in systems]),
        block_diag(*[s.C for s in systems]),
        block_diag(*[s.D for s in systems]),
    )


def random_system(rng, n, m, p, rho=0.9, complex_data=True):
    """Random model with spectral radius exactly ``rho`` (for tests and scripts)."""
    def draw(*shape):
        M = rng.standard_normal(shape)
        if complex_data:
            M = M + 1j * rng.standard_normal(shape)
        return M

    A = draw(n, n)
    A = A * (rho / spectral_radius(A))
    return StateSpace(A, draw(n, m), draw(p, n), draw(p, m))
