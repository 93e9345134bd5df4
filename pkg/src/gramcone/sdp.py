"""Small dense conic solver for semidefinite programs.

Programs are stated over complex Hermitian PSD blocks, real symmetric PSD
blocks, nonnegative scalars and free scalars, with linear equality
constraints ``<G_i, vars> = b_i``. Complex blocks are embedded in the real
PSD cone with :func:`gramcone.linalg.realify` before solving.

The solver works on the homogeneous self-dual embedding of

    minimize  c'x   subject to  A x + s = b,  s in K

and runs Douglas-Rachford splitting on it: one dense linear solve (the
projection onto the embedding's subspace) and one cone projection per
iteration, with over-relaxation and a residual-balancing scale. Both
solutions and infeasibility certificates come out of the same iteration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .linalg import hermitian_basis, hermitian_part, realify, unrealify

OPTIMAL = "optimal"
INFEASIBLE = "infeasible-detected"
UNBOUNDED = "unbounded-detected"
MAX_ITER = "max-iter"
STOPPED = "stopped"


@dataclass(frozen=True)
class SolverParams:
    tol: float = 1e-6
    max_iter: int = 50_000
    rho: float = 1.0
    alpha: float = 1.6
    adapt_ratio: float = 10.0
    adapt_factor: float = 2.0
    adapt_every: int = 50
    check_every: int = 10
    infeas_every: int = 100
    eps_infeas: float = 1e-7
    equilibrate: bool = True
    verbose: bool = False


def strictness_margin(*arrays):
    """Margin used to decide strict LMIs: ``1e-7 * (1 + ||data||_F)``."""
    total = np.sqrt(sum(np.linalg.norm(np.asarray(a)) ** 2 for a in arrays))
    return 1e-7 * (1.0 + total)


@dataclass
class _Block:
    kind: str  # "herm", "sym", "nonneg"
    dim: int
    name: str | None = None

    @property
    def real_dim(self):
        return 2 * self.dim if self.kind == "herm" else self.dim

    @property
    def nvars(self):
        if self.kind in ("nonneg", "free"):
            return self.dim
        d = self.real_dim
        return d * (d + 1) // 2


class ConicProgram:
    """Standard-form conic program assembled term by term.

    Blocks are referenced by the integer handle returned from ``add_*``.
    Coefficients on a ``"herm"`` block are Hermitian matrices and act as
    ``Re tr(G V)``; on ``"sym"`` blocks real symmetric matrices; on
    ``"nonneg"`` and ``"free"`` blocks plain vectors.
    """

    def __init__(self, sense="max"):
        if sense not in ("max", "min"):
            raise DomainError(f"sense must be 'max' or 'min', not {sense!r}")
        self.sense = sense
        self.blocks: list[_Block] = []
        self.equalities: list[tuple[dict, float]] = []
        self.objective: dict = {}

    # -- variables -------------------------------------------------------
    def add_psd(self, dim, complex=True, name=None):
        if dim < 1:
            raise DomainError("PSD block dimension must be positive")
        self.blocks.append(_Block("herm" if complex else "sym", int(dim), name))
        return len(self.blocks) - 1

    def add_nonneg(self, count=1, name=None):
        self.blocks.append(_Block("nonneg", int(count), name))
        return len(self.blocks) - 1

    def add_free(self, count=1, name=None):
        self.blocks.append(_Block("free", int(count), name))
        return len(self.blocks) - 1

    # -- data ------------------------------------------------------------
    def _coerce(self, terms):
        out = {}
        for h, G in terms.items():
            if not 0 <= h < len(self.blocks):
                raise DomainError(f"unknown block handle {h}")
            blk = self.blocks[h]
            if blk.kind in ("herm", "sym"):
                G = np.atleast_2d(np.asarray(G, dtype=complex if blk.kind == "herm" else float))
                if G.shape != (blk.dim, blk.dim):
                    raise DomainError(
                        f"coefficient for block {h} has shape {G.shape}, expected {(blk.dim, blk.dim)}"
                    )
                G = hermitian_part(G)
                if blk.kind == "sym":
                    G = np.real(G)
            else:
                G = np.atleast_1d(np.asarray(G, dtype=float))
                if G.shape != (blk.dim,):
                    raise DomainError(
                        f"coefficient for block {h} has shape {G.shape}, expected {(blk.dim,)}"
                    )
            if not np.all(np.isfinite(G)):
                raise DomainError("non-finite coefficient")
            out[h] = out[h] + G if h in out else G
        return out

    def add_equality(self, terms, rhs):
        rhs = float(np.real(rhs))
        if not np.isfinite(rhs):
            raise DomainError("rhs must be finite")
        self.equalities.append((self._coerce(terms), rhs))
        return len(self.equalities) - 1

    def add_hermitian_equality(self, rhs, congruences=(), linear=()):
        """Add the matrix equation ``sum s_k M_k V_k M_k* + sum F_j(x_j) = rhs``.

        ``congruences`` holds ``(block, M, s)`` triples; ``linear`` holds
        ``(block, F)`` pairs where ``F`` has shape ``(len(block), q, q)`` and
        maps a free or nonneg block to a ``q x q`` Hermitian matrix. One
        real equality per element of the Hermitian basis of size ``q``.
        Returns the list of equality indices, in basis order.
        """
        rhs = hermitian_part(np.atleast_2d(np.asarray(rhs, dtype=complex)))
        q = rhs.shape[0]
        idx = []
        for E in hermitian_basis(q):
            terms = {}
            for h, M, s in congruences:
                M = np.atleast_2d(np.asarray(M, dtype=complex))
                G = s * (M.conj().T @ E @ M)
                terms[h] = terms[h] + G if h in terms else G
            for h, F in linear:
                F = np.asarray(F, dtype=complex).reshape(-1, q, q)
                g = np.real(np.einsum("kij,ji->k", F, E))
                terms[h] = terms[h] + g if h in terms else g
            idx.append(self.add_equality(terms, np.real(np.trace(E @ rhs))))
        return idx

    def set_objective(self, terms):
        self.objective = self._coerce(terms)

    # -- compilation -------------------------------------------------------
    def _layout(self):
        offsets, off = [], 0
        for blk in self.blocks:
            offsets.append(off)
            off += blk.nvars
        return offsets, off

    def _row(self, terms, offsets, n):
        row = np.zeros(n)
        for h, G in terms.items():
            blk = self.blocks[h]
            o = offsets[h]
            if blk.kind == "herm":
                row[o:o + blk.nvars] = _svec(realify(G)) * 0.5
            elif blk.kind == "sym":
                row[o:o + blk.nvars] = _svec(G)
            else:
                row[o:o + blk.nvars] = G
        return row

    def compile(self):
        if not self.blocks:
            raise DomainError("program has no variables")
        offsets, n = self._layout()
        A_eq = np.array([self._row(t, offsets, n) for t, _ in self.equalities]).reshape(-1, n)
        b_eq = np.array([r for _, r in self.equalities], dtype=float)
        c = self._row(self.objective, offsets, n)
        if self.sense == "max":
            c = -c
        cone_rows, cones = [], []
        for h, blk in enumerate(self.blocks):
            if blk.kind == "free":
                continue
            rows = np.zeros((blk.nvars, n))
            rows[:, offsets[h]:offsets[h] + blk.nvars] = -np.eye(blk.nvars)
            cone_rows.append(rows)
            cones.append((blk.kind, blk.real_dim, h))
        A = np.vstack([A_eq] + cone_rows) if cone_rows else A_eq
        b = np.concatenate([b_eq, np.zeros(A.shape[0] - len(b_eq))])
        return _Compiled(A=A, b=b, c=c, meq=len(b_eq), cones=cones, offsets=offsets, n=n)


@dataclass
class _Compiled:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    meq: int
    cones: list
    offsets: list
    n: int


@dataclass
class ConicSolution:
    status: str
    values: list  # per block: Hermitian / symmetric matrix or vector
    duals: np.ndarray  # multiplier per equality
    slacks: list  # dual slack per block (None for free blocks)
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    certificate: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == OPTIMAL


# -- svec helpers --------------------------------------------------------------

_SVEC_CACHE: dict = {}


def _svec_index(d):
    if d not in _SVEC_CACHE:
        i, j = np.tril_indices(d)
        w = np.where(i == j, 1.0, np.sqrt(2.0))
        _SVEC_CACHE[d] = (i, j, w)
    return _SVEC_CACHE[d]


def _svec(S):
    i, j, w = _svec_index(S.shape[0])
    return np.real(S[i, j]) * w


def _smat(v, d):
    i, j, w = _svec_index(d)
    S = np.zeros((d, d))
    S[i, j] = v / w
    S[j, i] = v / w
    return S


def _proj_psd(v, d):
    S = _smat(v, d)
    lam, U = np.linalg.eigh(S)
    lam = np.maximum(lam, 0.0)
    return _svec((U * lam) @ U.T)


# -- the solver ------------------------------------------------------------------


class _Cone:
    """Dual-cone projection onto y-space: free on equality rows, then PSD/nonneg blocks."""

    def __init__(self, meq, cones):
        self.meq = meq
        self.pieces = []
        off = meq
        for kind, d, _ in cones:
            size = d if kind == "nonneg" else d * (d + 1) // 2
            self.pieces.append((kind, d, off, off + size))
            off += size
        self.m = off

    def project(self, y):
        out = y.copy()
        for kind, d, lo, hi in self.pieces:
            if kind == "nonneg":
                np.maximum(out[lo:hi], 0.0, out=out[lo:hi])
            else:
                out[lo:hi] = _proj_psd(y[lo:hi], d)
        return out

    def row_groups(self):
        groups = [np.array([i]) for i in range(self.meq)]
        for kind, _, lo, hi in self.pieces:
            if kind == "nonneg":
                groups.extend(np.array([i]) for i in range(lo, hi))
            else:
                groups.append(np.arange(lo, hi))
        return groups


def _equilibrate(A, groups, passes=25):
    m, n = A.shape
    E, D = np.ones(m), np.ones(n)
    M = A.copy()
    for _ in range(passes):
        r = np.abs(M).max(axis=1) if n else np.ones(m)
        rg = np.ones(m)
        for g in groups:
            val = r[g].max()
            rg[g] = val if val > 1e-12 else 1.0
        c = np.abs(M).max(axis=0) if m else np.ones(n)
        c = np.where(c > 1e-12, c, 1.0)
        er, dc = 1.0 / np.sqrt(rg), 1.0 / np.sqrt(c)
        M = (er[:, None] * M) * dc[None, :]
        E *= er
        D *= dc
    return M, E, D


def _inf(x):
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def solve(prog: ConicProgram, params: SolverParams | None = None, callback=None):
    """Solve a :class:`ConicProgram`.

    ``callback(iteration, x, y, s)`` is called at every termination check
    with the current unscaled iterates (internal ordering); returning a
    truthy value stops the run with status ``"stopped"``.
    """
    params = params or SolverParams()
    comp = prog.compile()
    cone = _Cone(comp.meq, comp.cones)
    A, b, c = comp.A, comp.b, comp.c
    m, n = A.shape

    if params.equilibrate:
        Ah, E, D = _equilibrate(A, cone.row_groups())
    else:
        Ah, E, D = A.copy(), np.ones(m), np.ones(n)
    bt, ct = E * b, D * c
    sb = 1.0 / max(1.0, _inf(bt))
    sc = 1.0 / max(1.0, _inf(ct))
    bh, ch = bt * sb, ct * sc

    N = n + m + 1
    Q = np.zeros((N, N))
    Q[:n, n:n + m] = Ah.T
    Q[:n, -1] = ch
    Q[n:n + m, :n] = -Ah
    Q[n:n + m, -1] = bh
    Q[-1, :n] = -ch
    Q[-1, n:n + m] = -bh

    scale = params.rho

    def metric(scale):
        R = np.empty(N)
        R[:n] = 1.0
        R[n:n + m] = scale
        R[-1] = 1.0
        return R

    def factor(R):
        return np.linalg.solve(np.diag(R) + Q, np.diag(R))

    R = metric(scale)
    K = factor(R)

    u = np.zeros(N)
    u[-1] = 1.0
    v = np.zeros(N)
    w = u + v / R

    norm_b, norm_c = _inf(b), _inf(c)
    status = MAX_ITER
    it = 0
    best = None
    pres_hist = dres_hist = 1.0
    alpha = params.alpha
    adapt_interval = params.adapt_every
    next_adapt = adapt_interval

    def unscale(u, v):
        tau = u[-1]
        x = D * u[:n] / sb
        y = E * u[n:n + m] / sc
        s = v[n:n + m] / E / sb
        return x, y, s, tau

    for it in range(1, params.max_iter + 1):
        ut = K @ w
        p = 2.0 * ut - w
        u = p.copy()
        u[n:n + m] = cone.project(p[n:n + m])
        u[-1] = max(p[-1], 0.0)
        v = R * (u - p)
        w = w + alpha * (u - ut)

        if it % params.check_every and it % params.infeas_every:
            continue

        x_r, y_r, s_r, tau = unscale(u, v)
        if tau > 1e-12:
            x, y, s = x_r / tau, y_r / tau, s_r / tau
            Ax = A @ x
            Aty = A.T @ y
            cx, by = float(c @ x), float(b @ y)
            pres = _inf(Ax + s - b) / (1.0 + max(norm_b, _inf(Ax), _inf(s)))
            dres = _inf(Aty + c) / (1.0 + max(norm_c, _inf(Aty)))
            gap = abs(cx + by) / (1.0 + max(abs(cx), abs(by)))
            best = (x, y, s, pres, dres, gap)
            pres_hist, dres_hist = pres, dres
            if callback is not None and callback(it, x, y, s):
                status = STOPPED
                break
            if pres <= params.tol and dres <= params.tol and gap <= params.tol:
                status = OPTIMAL
                break

        if it % params.infeas_every == 0:
            by_r = float(b @ y_r)
            if by_r < 0:
                yc = y_r / -by_r
                if _inf(A.T @ yc) * max(norm_b, 1.0) <= params.eps_infeas:
                    status = INFEASIBLE
                    best = (None, yc, None, np.inf, np.inf, np.inf)
                    break
            cx_r = float(c @ x_r)
            if cx_r < 0:
                xc, sc_ = x_r / -cx_r, s_r / -cx_r
                if _inf(A @ xc + sc_) * max(norm_c, 1.0) <= params.eps_infeas:
                    status = UNBOUNDED
                    best = (xc, None, sc_, np.inf, np.inf, np.inf)
                    break

        if it >= next_adapt and tau > 1e-12:
            next_adapt = it + adapt_interval
            ratio = pres_hist / max(dres_hist, 1e-300)
            new = scale
            if ratio > params.adapt_ratio:
                new = scale / params.adapt_factor
            elif ratio < 1.0 / params.adapt_ratio:
                new = scale * params.adapt_factor
            new = min(max(new, 1e-6), 1e6)
            if new != scale:
                # back off so that alternating rescales cannot keep resetting the iteration
                adapt_interval *= 2
                scale = new
                R = metric(scale)
                K = factor(R)
                w = u + v / R

    return _package(prog, comp, status, best, it)


def _package(prog, comp, status, best, it):
    nblk = len(prog.blocks)
    values = [None] * nblk
    slacks = [None] * nblk
    certificate = {}
    meq = comp.meq

    if best is None:
        best = (np.zeros(comp.n), np.zeros(comp.A.shape[0]), np.zeros(comp.A.shape[0]),
                np.inf, np.inf, np.inf)
    x, y, s, pres, dres, gap = best

    def block_value(vec, blk):
        if blk.kind == "herm":
            return unrealify(_smat(vec, blk.real_dim))
        if blk.kind == "sym":
            return _smat(vec, blk.dim)
        return vec.copy()

    row = meq
    cone_pos = {}
    for kind, d, h in comp.cones:
        size = d if kind == "nonneg" else d * (d + 1) // 2
        cone_pos[h] = (row, row + size)
        row += size

    if x is not None:
        for h, blk in enumerate(prog.blocks):
            o = comp.offsets[h]
            if h in cone_pos and s is not None:
                lo, hi = cone_pos[h]
                values[h] = block_value(s[lo:hi], blk)
            else:
                values[h] = x[o:o + blk.nvars].copy()
    if y is not None:
        sign = 1.0 if prog.sense == "max" else -1.0
        duals = sign * y[:meq]
        for h, blk in enumerate(prog.blocks):
            if h in cone_pos:
                lo, hi = cone_pos[h]
                Z = block_value(y[lo:hi], blk)
                slacks[h] = 2.0 * Z if blk.kind == "herm" else Z
    else:
        duals = np.full(meq, np.nan)

    b_eq = comp.b[:meq]
    if status == INFEASIBLE:
        certificate = {"duals": duals, "slacks": slacks, "rhs_value": float(duals @ b_eq)}
        values = [None] * nblk
        pobj = dobj = np.nan
    elif status == UNBOUNDED:
        certificate = {"direction": values, "cost": float(-comp.c @ x) if prog.sense == "max" else float(comp.c @ x)}
        pobj = dobj = np.nan
    else:
        cx = float(comp.c @ x)
        by = float(comp.b @ y)
        pobj = -cx if prog.sense == "max" else cx
        dobj = by if prog.sense == "max" else -by
    return ConicSolution(
        status=status, values=values, duals=duals, slacks=slacks,
        primal_objective=pobj, dual_objective=dobj,
        primal_residual=pres, dual_residual=dres, gap=gap,
        iterations=it, certificate=certificate,
    )


def add_lmi(prog, constant, linear=(), congruences=(), margin=None):
    """Constrain ``constant + sum F_j(x_j) + sum s M V M^* (+ margin I) <= 0``.

    Introduces a Hermitian PSD slack ``S`` with
    ``S + constant + ... = 0`` and returns its handle. ``margin`` is an
    optional scalar free/nonneg block handle entering as ``+ t I``.
    """
    constant = hermitian_part(np.atleast_2d(np.asarray(constant, dtype=complex)))
    q = constant.shape[0]
    S = prog.add_psd(q)
    lin = list(linear)
    if margin is not None:
        lin.append((margin, np.eye(q)[None]))
    prog.add_hermitian_equality(
        -constant, congruences=[(S, np.eye(q), 1.0)] + list(congruences), linear=lin
    )
    return S


def check_feasibility(prog: ConicProgram, strictness_margin=0.0, params=None):
    """Decide feasibility of ``prog``'s constraints (its objective is ignored).

    With ``strictness_margin > 0`` every PSD block is required to satisfy
    ``V >= margin * I`` (and nonneg entries ``>= margin``). Returns a dict
    with ``verdict`` in {"feasible", "infeasible", "undecided"}; a feasible
    verdict carries the point, an infeasible one the alternative-system
    certificate: multipliers ``y`` with ``sum y_i G_i >= 0`` blockwise and
    ``b'y < 0``.
    """
    shifted = ConicProgram("min")
    shifted.blocks = list(prog.blocks)
    for terms, rhs in prog.equalities:
        r = rhs
        if strictness_margin:
            for h, G in terms.items():
                kind = prog.blocks[h].kind
                if kind in ("herm", "sym"):
                    r -= strictness_margin * float(np.real(np.trace(G)))
                elif kind == "nonneg":
                    r -= strictness_margin * float(np.sum(G))
        shifted.equalities.append((terms, r))
    sol = solve(shifted, params)
    out = {"verdict": "undecided", "solution": sol}
    if sol.status == OPTIMAL:
        point = []
        for h, blk in enumerate(prog.blocks):
            val = sol.values[h]
            if strictness_margin and blk.kind in ("herm", "sym"):
                val = val + strictness_margin * np.eye(blk.dim)
            elif strictness_margin and blk.kind == "nonneg":
                val = val + strictness_margin
            point.append(val)
        out.update(verdict="feasible", point=point)
    elif sol.status == INFEASIBLE:
        # min-sense duals are sign flipped; the Farkas vector is y = -duals
        y = -sol.certificate["duals"]
        y = y / max(-float(y @ np.array([r for _, r in shifted.equalities])), 1e-300)
        out.update(verdict="infeasible", certificate={"y": y, "Z": sol.certificate["slacks"]})
    return out
