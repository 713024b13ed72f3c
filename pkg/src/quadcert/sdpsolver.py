"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Solves the standard primal form

    min  sum_b <C_b, X_b> + c_f . u
    s.t. sum_b <A_(i,b), X_b> + F_i . u = rhs_i     (i = 1..m)
         X_b  PSD,   u free scalars,

with the HKM search direction and a Mehrotra predictor-corrector, starting
from an infeasible interior point (scaled identities). Free scalars are
split into pairs of nonnegative 1x1 blocks. The Schur complement is
assembled densely per block through the kernels layer and factored with
Cholesky; iterates are fully deterministic for fixed inputs and options.

The moment-relaxation SDPs this solver exists for are small (a few thousand
constraints, blocks up to a few hundred) but numerically delicate near
optimality, hence the conservative step fraction and the explicit
"numerical-failure" status instead of a wrong "optimal".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la

from . import kernels

OPTIMAL = "optimal"
MAX_ITERATIONS = "max-iterations"
NUMERICAL_FAILURE = "numerical-failure"


@dataclass
class SolveOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-7
    max_iters: int = 100
    step_frac: float = 0.98
    verbose: bool = False


@dataclass
class BlockSdp:
    """Block-diagonal SDP data.

    block_entries[b] holds the constraint coefficients of block b as four
    parallel arrays (constraint index, row, col, value); symmetric entries
    must both be present (the pair (r, c) and (c, r) each with value v).
    """

    block_dims: list[int]
    C: list[np.ndarray]
    block_entries: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]
    rhs: np.ndarray
    free_rows: list[np.ndarray] = field(default_factory=list)
    free_coefs: list[np.ndarray] = field(default_factory=list)
    free_obj: list[float] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.rhs)

    @property
    def n_free(self) -> int:
        return len(self.free_obj)

    def dump_text(self) -> str:
        """Debug dump: sizes, then constraint matrices as coordinate triplets."""
        lines = [f"blocks {len(self.block_dims)} constraints {self.m} free {self.n_free}"]
        lines.append("dims " + " ".join(map(str, self.block_dims)))
        lines.append("rhs " + " ".join(repr(v) for v in self.rhs.tolist()))
        for b, dim in enumerate(self.block_dims):
            Cb = self.C[b]
            for r in range(dim):
                for c in range(dim):
                    if Cb[r, c] != 0.0:
                        lines.append(f"C {b} {r} {c} {Cb[r, c]!r}")
            rows, rr, cc, vv = self.block_entries[b]
            for i, r, c, v in zip(rows, rr, cc, vv):
                lines.append(f"A {int(i)} {b} {int(r)} {int(c)} {float(v)!r}")
        for k in range(self.n_free):
            for i, v in zip(self.free_rows[k], self.free_coefs[k]):
                lines.append(f"F {int(i)} {k} {float(v)!r}")
            lines.append(f"Fobj {k} {self.free_obj[k]!r}")
        return "\n".join(lines) + "\n"


@dataclass
class SdpSolution:
    status: str
    X: list[np.ndarray]
    y: np.ndarray
    free_values: np.ndarray
    primal_obj: float
    dual_obj: float
    gap: float
    iterations: int
    note: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _split_free(p: BlockSdp):
    """Append two 1x1 blocks per free scalar (u = u_plus - u_minus)."""
    dims = list(p.block_dims)
    C = [np.asarray(c, dtype=float) for c in p.C]
    entries = list(p.block_entries)
    for k in range(p.n_free):
        rows = np.asarray(p.free_rows[k], dtype=np.int64)
        coefs = np.asarray(p.free_coefs[k], dtype=float)
        zer = np.zeros(len(rows), dtype=np.int64)
        dims.append(1)
        C.append(np.array([[p.free_obj[k]]]))
        entries.append((rows, zer, zer, coefs.copy()))
        dims.append(1)
        C.append(np.array([[-p.free_obj[k]]]))
        entries.append((rows, zer, zer, -coefs))
    return dims, C, entries


def solve(p: BlockSdp, opts: SolveOptions | None = None) -> SdpSolution:
    opts = opts or SolveOptions()
    dims, C, entries = _split_free(p)
    m = p.m
    rhs = np.asarray(p.rhs, dtype=float)
    nb = len(dims)
    ops = [
        kernels.make_block_ops(dims[b], m, *entries[b])
        for b in range(nb)
    ]

    # Frobenius norms of the A_i (across blocks) and of C, for scaling.
    anorm_sq = np.zeros(m)
    for b in range(nb):
        rows, _, _, vals = entries[b]
        np.add.at(anorm_sq, rows, vals * vals)
    anorm = np.sqrt(anorm_sq)
    cnorm = math.sqrt(sum(float(np.sum(Cb * Cb)) for Cb in C))
    bnorm = float(np.linalg.norm(rhs))
    ntot = sum(dims)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(anorm > 0, (1.0 + np.abs(rhs)) / (1.0 + anorm), 0.0)
    xi = max(10.0, math.sqrt(ntot), float(np.max(ratio, initial=0.0)) * math.sqrt(ntot))
    eta = max(10.0, math.sqrt(ntot), (cnorm + float(np.max(anorm, initial=0.0))) / math.sqrt(ntot))

    X = [xi * np.eye(d) for d in dims]
    S = [eta * np.eye(d) for d in dims]
    y = np.zeros(m)

    def primal_obj():
        return sum(float(np.sum(C[b] * X[b])) for b in range(nb))

    def a_of(mats) -> np.ndarray:
        out = np.zeros(m)
        for b in range(nb):
            out += ops[b].dots(mats[b])
        return out

    def max_step(M: np.ndarray, dM: np.ndarray) -> float:
        """sup alpha with M + alpha dM PSD, for M positive definite."""
        try:
            L = la.cholesky(M, lower=True, check_finite=False)
        except la.LinAlgError:
            return 0.0
        W = la.solve_triangular(L, dM, lower=True, check_finite=False)
        W = la.solve_triangular(L, W.T, lower=True, check_finite=False)
        lam = float(np.min(la.eigvalsh((W + W.T) / 2.0, check_finite=False)))
        if lam >= 0.0:
            return math.inf
        return -1.0 / lam

    status = MAX_ITERATIONS
    note = ""
    iteration = 0
    mu0 = sum(float(np.sum(X[b] * S[b])) for b in range(nb)) / ntot

    for iteration in range(1, opts.max_iters + 1):
        try:
            Sinv = []
            for b in range(nb):
                Lb = la.cholesky(S[b], lower=True, check_finite=False)
                Sinv.append(la.cho_solve((Lb, True), np.eye(dims[b]), check_finite=False))
        except la.LinAlgError:
            status = NUMERICAL_FAILURE
            note = "dual block lost positive definiteness"
            break

        a_x = a_of(X)
        rp = rhs - a_x
        Rd = [C[b] - S[b] - ops[b].weighted_sum(y) for b in range(nb)]
        mu = sum(float(np.sum(X[b] * S[b])) for b in range(nb)) / ntot

        pobj = primal_obj()
        dobj = float(rhs @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        prel = float(np.linalg.norm(rp)) / (1.0 + bnorm)
        drel = math.sqrt(sum(float(np.sum(Rd[b] * Rd[b])) for b in range(nb))) / (1.0 + cnorm)
        if opts.verbose:
            print(
                f"iter {iteration:3d} mu {mu:9.2e} gap {gap:9.2e} "
                f"pinf {prel:9.2e} dinf {drel:9.2e} pobj {pobj:+.9e}"
            )
        if gap <= opts.gap_tol and prel <= opts.feas_tol and drel <= opts.feas_tol:
            status = OPTIMAL
            break
        if not math.isfinite(mu) or mu > 1e10 * (1.0 + mu0):
            status = NUMERICAL_FAILURE
            note = "iterates diverged (possible infeasibility)"
            break

        # Schur complement M[i, j] = sum_b <A_i, X A_j Sinv>
        M = np.zeros((m, m))
        for b in range(nb):
            ops[b].schur_accumulate(X[b], Sinv[b], M)
        M = 0.5 * (M + M.T)

        chol = None
        shift = 0.0
        base = float(np.trace(M)) / m if m else 1.0
        for attempt in range(6):
            try:
                chol = la.cho_factor(
                    M if shift == 0.0 else M + shift * np.eye(m),
                    lower=True,
                    check_finite=False,
                )
                break
            except la.LinAlgError:
                shift = base * (10.0 ** (attempt - 12))
        if chol is None:
            status = NUMERICAL_FAILURE
            note = "singular Schur complement"
            break

        a_sinv = a_of(Sinv)
        XRdSinv = [X[b] @ Rd[b] @ Sinv[b] for b in range(nb)]
        a_xrds = a_of(XRdSinv)

        def direction(nu: float, corr=None):
            rhs_vec = rp + a_x + a_xrds - nu * a_sinv
            if corr is not None:
                rhs_vec = rhs_vec + a_of(corr)
            dy = la.cho_solve(chol, rhs_vec, check_finite=False)
            dS = [Rd[b] - ops[b].weighted_sum(dy) for b in range(nb)]
            dX = []
            for b in range(nb):
                raw = nu * Sinv[b] - X[b] - X[b] @ dS[b] @ Sinv[b]
                if corr is not None:
                    raw = raw - corr[b]
                dX.append(0.5 * (raw + raw.T))
            return dX, dy, dS

        # predictor
        dXp, dyp, dSp = direction(0.0)
        ap = min(1.0, opts.step_frac * min(max_step(X[b], dXp[b]) for b in range(nb)))
        ad = min(1.0, opts.step_frac * min(max_step(S[b], dSp[b]) for b in range(nb)))
        mu_aff = (
            sum(float(np.sum((X[b] + ap * dXp[b]) * (S[b] + ad * dSp[b]))) for b in range(nb))
            / ntot
        )
        sigma = min(1.0, max((mu_aff / mu) ** 3 if mu > 0 else 0.0, 1e-8))

        # corrector with the second-order term dXp dSp Sinv
        corr = [dXp[b] @ dSp[b] @ Sinv[b] for b in range(nb)]
        dX, dy, dS = direction(sigma * mu, corr=corr)

        ap = min(1.0, opts.step_frac * min(max_step(X[b], dX[b]) for b in range(nb)))
        ad = min(1.0, opts.step_frac * min(max_step(S[b], dS[b]) for b in range(nb)))
        if ap <= 1e-10 and ad <= 1e-10:
            status = NUMERICAL_FAILURE
            note = "step lengths collapsed"
            break
        for b in range(nb):
            X[b] = X[b] + ap * dX[b]
            S[b] = S[b] + ad * dS[b]
        y = y + ad * dy

    pobj = primal_obj()
    dobj = float(rhs @ y)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))

    n_user = len(p.block_dims)
    free_values = np.array(
        [float(X[n_user + 2 * k][0, 0] - X[n_user + 2 * k + 1][0, 0]) for k in range(p.n_free)]
    )
    return SdpSolution(
        status=status,
        X=[X[b] for b in range(n_user)],
        y=y,
        free_values=free_values,
        primal_obj=pobj,
        dual_obj=dobj,
        gap=gap,
        iterations=iteration,
        note=note,
    )


def min_eig_lower_bound(A: np.ndarray, tol: float = 1e-6) -> float:
    """Certified lower bound on the smallest eigenvalue of symmetric A.

    Bisects on the shift t, testing A - t I for positive semidefiniteness
    by Cholesky, and returns a passing shift minus a safety margin. The gap
    to the true minimum eigenvalue is at most tol * (1 + ||A||).
    """
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return 0.0
    A = 0.5 * (A + A.T)
    scale = 1.0 + float(np.linalg.norm(A, ord="fro"))
    margin = 1e-9 * scale

    diag = np.diag(A)
    offsum = np.sum(np.abs(A), axis=1) - np.abs(diag)
    lo = float(np.min(diag - offsum)) - scale * 1e-12 - 1.0  # Gershgorin, padded
    hi = float(np.min(diag))  # lambda_min <= min diagonal entry

    def psd(t: float) -> bool:
        try:
            la.cholesky(A - t * np.eye(A.shape[0]), lower=True, check_finite=False)
            return True
        except la.LinAlgError:
            return False

    if psd(hi):
        return hi - margin
    while hi - lo > tol * scale * 0.5:
        mid = 0.5 * (lo + hi)
        if psd(mid):
            lo = mid
        else:
            hi = mid
    return lo - margin
