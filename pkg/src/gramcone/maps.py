"""Affine maps between spaces of Hermitian matrices, stored by coefficient tensor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import hermitian_basis, hermitian_part


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``f(W) = sum_k <T_k, W> E_k + c`` with ``E_k`` the Hermitian basis of size q.

    ``coef`` has shape ``(q*q, m, m)`` (Hermitian slices), ``const`` is q x q.
    """

    coef: np.ndarray
    const: np.ndarray
    label: str = ""

    def __post_init__(self):
        T = np.asarray(self.coef, dtype=complex)
        c = np.atleast_2d(np.asarray(self.const, dtype=complex))
        q = c.shape[0]
        if T.ndim != 3 or T.shape[0] != q * q or T.shape[1] != T.shape[2]:
            raise DomainError(f"coefficient tensor must be (q*q, m, m) with q={q}, got {T.shape}")
        if np.linalg.norm(T - T.conj().transpose(0, 2, 1)) > 1e-12 * (1 + np.linalg.norm(T)):
            raise DomainError("coefficient slices must be Hermitian")
        if np.linalg.norm(c - c.conj().T) > 1e-12 * (1 + np.linalg.norm(c)):
            raise DomainError("constant term must be Hermitian")
        object.__setattr__(self, "coef", 0.5 * (T + T.conj().transpose(0, 2, 1)))
        object.__setattr__(self, "const", hermitian_part(c))

    @classmethod
    def scalar(cls, G, c, label=""):
        """``<G, W> + c`` as a 1 x 1 map."""
        return cls(np.asarray(G, dtype=complex)[None], np.array([[c]]), label)

    @classmethod
    def from_linear(cls, fn, m, q, const, label=""):
        """Tabulate a linear ``fn: H^m -> H^q`` through its adjoint on the basis of H^q."""
        Em, Eq = hermitian_basis(m), hermitian_basis(q)
        # <E_k, fn(Em_j)> gives the coordinates of T_k in the (orthonormal) basis Em
        tab = np.array([[np.real(np.trace(Ek @ fn(Ej))) for Ej in Em] for Ek in Eq])
        T = np.tensordot(tab, Em, axes=1)
        return cls(T, const, label)

    @property
    def q(self):
        return self.const.shape[0]

    @property
    def m(self):
        return self.coef.shape[1]

    def linear(self, W):
        W = np.asarray(W, dtype=complex)
        vals = np.real(np.einsum("kij,ji->k", self.coef, W))
        return np.tensordot(vals, hermitian_basis(self.q), axes=1)

    def __call__(self, W):
        return self.linear(W) + self.const

    def adjoint(self, Y):
        """Adjoint of the linear part: ``<Y, f(W) - c> = <f^*(Y), W>``."""
        Y = np.atleast_2d(np.asarray(Y, dtype=complex))
        y = np.real(np.einsum("kij,ji->k", hermitian_basis(self.q), Y))
        return np.tensordot(y, self.coef, axes=1)

    def negated(self):
        return AffineMap(-self.coef, -self.const, f"-({self.label})")

    def matrix(self):
        """Real matrix of the linear part in the orthonormal Hermitian bases."""
        Em = hermitian_basis(self.m)
        return np.real(np.einsum("kij,lji->kl", self.coef, Em))

    def operator_norm(self):
        """Frobenius-to-Frobenius norm of the linear part."""
        M = self.matrix()
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
