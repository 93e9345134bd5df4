"""Dense complex linear algebra primitives.

Everything here works on small dense ``numpy`` arrays (a few dozen rows at
most). Hermitian inputs are checked against ``HERM_TOL`` relative to their
Frobenius norm.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, SolverFailure

HERM_TOL = 1e-10
EIG_TOL = 1e-10
LYAP_TOL = 1e-9


def as_matrix(M, name="matrix"):
    """Coerce to a finite 2-D complex array."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise DomainError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} has non-finite entries")
    return M


def is_hermitian(H, tol=HERM_TOL):
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    return np.linalg.norm(H - H.conj().T) <= tol * (1.0 + np.linalg.norm(H))


def hermitian_part(H):
    H = np.asarray(H)
    return 0.5 * (H + H.conj().T)


def _check_hermitian(H, name="H"):
    H = as_matrix(H, name)
    if not is_hermitian(H):
        raise DomainError(f"{name} is not Hermitian within tolerance")
    return hermitian_part(H)


def jacobi_eigh(S, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns ascending eigenvalues and an orthogonal eigenvector matrix.
    Raises ``SolverFailure`` if the off-diagonal mass does not drop below
    ``tol * ||S||_F`` within ``max_sweeps`` sweeps.
    """
    S = np.array(S, dtype=float)
    n = S.shape[0]
    Q = np.eye(n)
    scale = np.linalg.norm(S)
    if n < 2 or scale == 0.0:
        d = np.diag(S).copy()
        order = np.argsort(d)
        return d[order], Q[:, order]
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(S**2) - np.sum(np.diag(S) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = S[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (S[q, q] - S[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # rotate rows/cols p, q
                Sp, Sq = S[:, p].copy(), S[:, q].copy()
                S[:, p] = c * Sp - s * Sq
                S[:, q] = s * Sp + c * Sq
                Sp, Sq = S[p, :].copy(), S[q, :].copy()
                S[p, :] = c * Sp - s * Sq
                S[q, :] = s * Sp + c * Sq
                Qp, Qq = Q[:, p].copy(), Q[:, q].copy()
                Q[:, p] = c * Qp - s * Qq
                Q[:, q] = s * Qp + c * Qq
    else:
        raise SolverFailure(f"Jacobi did not converge in {max_sweeps} sweeps")
    d = np.diag(S).copy()
    order = np.argsort(d)
    return d[order], Q[:, order]


def _complex_from_realified(d, Q, n, tol):
    """Recover complex eigenpairs of H from eigenpairs of realify(H).

    Each eigenvalue of H appears twice in realify(H); eigenvectors [a; b]
    map to complex candidates a + ib. Within each cluster of equal
    eigenvalues the candidates span the complex eigenspace twice over, so an
    SVD extracts an orthonormal complex basis.
    """
    cand = Q[:n, :] + 1j * Q[n:, :]
    vals, vecs = [], []
    scale = max(1.0, np.max(np.abs(d)))
    i = 0
    while i < 2 * n:
        j = i + 1
        while j < 2 * n and d[j] - d[i] <= tol * scale:
            j += 1
        q = (j - i) // 2
        if q:
            U, _, _ = np.linalg.svd(cand[:, i:j], full_matrices=False)
            vecs.append(U[:, :q])
            vals.extend([np.mean(d[i:j])] * q)
        i = j
    return np.array(vals), np.hstack(vecs)


def herm_eig(H, method="lapack"):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    H : array_like
        Hermitian matrix (checked within ``HERM_TOL``).
    method : {"lapack", "jacobi"}
        ``"jacobi"`` runs cyclic Jacobi on ``realify(H)``; ``"lapack"`` calls
        ``numpy.linalg.eigh``. Both return ascending eigenvalues and a
        unitary eigenvector matrix.
    """
    H = _check_hermitian(H)
    n = H.shape[0]
    if method == "lapack":
        try:
            lam, U = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(str(exc)) from exc
        return lam, U
    if method == "jacobi":
        d, Q = jacobi_eigh(realify(H))
        lam, U = _complex_from_realified(d, Q, n, tol=1e-9)
        if U.shape[1] != n:
            raise SolverFailure("could not pair realified eigenvalues")
        return lam, U
    raise ValueError(f"unknown method {method!r}")


def min_eig(H):
    """Smallest eigenvalue of a Hermitian matrix (no Hermitian check)."""
    H = hermitian_part(np.atleast_2d(H))
    if H.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(H)[0])


def spectral_radius(A):
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise DomainError("spectral radius needs a square matrix")
    if A.size == 0:
        return 0.0
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(str(exc)) from exc
    return float(np.max(np.abs(ev)))


def is_schur_stable(A, margin=0.0):
    return spectral_radius(A) < 1.0 - margin


def dlyap(A, Q):
    """Solve ``A X A* - X + Q = 0`` for Hermitian ``X``.

    Uses the Kronecker form ``(I - conj(A) kron A) vec(X) = vec(Q)``, which is
    exact up to the linear solve at the sizes used here.
    """
    A = as_matrix(A, "A")
    Q = _check_hermitian(Q, "Q")
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise DomainError(f"dlyap shape mismatch: A {A.shape}, Q {Q.shape}")
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    if not is_schur_stable(A):
        raise DomainError("dlyap requires a Schur-stable A (spectral radius < 1)")
    K = np.eye(n * n) - np.kron(A.conj(), A)
    x = np.linalg.solve(K, Q.reshape(-1, order="F"))
    return hermitian_part(x.reshape(n, n, order="F"))


def realify(H):
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]``."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    Re, Im = H.real, H.imag
    return np.block([[Re, -Im], [Im, Re]])


def unrealify(S):
    """Left inverse of :func:`realify`, averaging the redundant blocks.

    For a general real symmetric ``S`` this is the Hermitian ``V`` whose
    embedding is the orthogonal projection of ``S`` onto the image of
    ``realify``; it preserves positive semidefiniteness.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    S11, S12 = S[:n, :n], S[:n, n:]
    S21, S22 = S[n:, :n], S[n:, n:]
    return hermitian_part(0.5 * (S11 + S22) + 0.5j * (S21 - S12))


def frobenius_distance(X, Y):
    X, Y = np.asarray(X), np.asarray(Y)
    if X.shape != Y.shape:
        raise DomainError(f"shape mismatch {X.shape} vs {Y.shape}")
    return float(np.linalg.norm(X - Y))


def hermitian_basis(n):
    """Orthonormal basis of the real vector space of n x n Hermitian matrices.

    Returns an array of shape ``(n*n, n, n)``: diagonal units, then the
    symmetric and the imaginary antisymmetric off-diagonal pairs, each
    scaled to unit Frobenius norm.
    """
    basis = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    r = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = E[j, i] = r
            basis.append(E)
            F = np.zeros((n, n), dtype=complex)
            F[i, j], F[j, i] = -1j * r, 1j * r
            basis.append(F)
    return np.array(basis).reshape(n * n, n, n)


def herm_from_coords(coords, n):
    """Inverse of :func:`herm_coords` for the basis above."""
    return np.tensordot(np.asarray(coords, dtype=float), hermitian_basis(n), axes=1)


def herm_coords(H):
    """Real coordinates of Hermitian ``H`` in :func:`hermitian_basis`."""
    H = np.asarray(H)
    n = H.shape[0]
    B = hermitian_basis(n)
    return np.real(np.einsum("kij,ji->k", B, H))


def matrix_power_norms(A, tol=1e-16, max_terms=100_000):
    """Spectral norms ``||A^k||_2`` for k = 0, 1, ... until they fall below ``tol``.

    The sequence is summable for Schur-stable ``A``; we stop once the
    geometric tail bound built from the observed per-step ratio is below
    ``tol`` as well.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    if not is_schur_stable(A):
        raise DomainError("matrix power norms require a Schur-stable A")
    norms = []
    P = np.eye(n, dtype=complex)
    for _ in range(max_terms):
        norms.append(np.linalg.norm(P, 2) if n else 0.0)
        if len(norms) > 1 and norms[-1] < tol:
            break
        P = A @ P
    return np.array(norms)
