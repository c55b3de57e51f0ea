"""Dense semidefinite programming engine.

Solves   min  <C, X> + d'z - w log det(X_B)
         s.t. sum_b <A_ib, X_b> + (F z)_i = b_i,   X_b >= 0 (PSD), z free

with a primal-dual path-following interior-point method using Nesterov-Todd
scaling and Mehrotra predictor-corrector steps.  Problems with a linear
objective run inside a homogeneous self-dual embedding so that primal or dual
infeasibility surfaces as a certificate (tau/kappa branch) instead of an
iteration failure.  A log-det objective term is handled by shifting the
complementarity target of the designated block: its central path satisfies
X_B S_B = (mu + w) I, so the barrier weight w survives as mu -> 0.

Statuses:
  optimal            tolerances met on the de-homogenized iterate
  primal_infeasible  Farkas ray y with b'y > 0, A*(y) + S = 0, F'y = 0
  dual_unbounded     improving primal ray (c'x < 0, A(x) = 0); the primal
                     objective is unbounded below and the dual is infeasible
  inaccurate         stalled short of tolerances; best iterate returned
  iter_limit         iteration budget exhausted

All storage is dense; Schur complements are formed and factorized densely,
which is the right trade at the problem sizes produced by the relaxation
compiler (a few thousand variables at most).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal_infeasible"
DUAL_UNBOUNDED = "dual_unbounded"
INACCURATE = "inaccurate"
ITER_LIMIT = "iter_limit"

_STEP_FRACTION = 0.98     # fraction-to-boundary factor


class SdpError(ValueError):
    pass


@dataclass
class SolverSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iterations: int = 200
    infeas_threshold: float = 1e-7
    verbose: bool = False

    def __post_init__(self):
        if min(self.gap_tol, self.feas_tol, self.infeas_threshold) <= 0:
            raise SdpError("tolerances must be positive")


@dataclass
class SdpProblem:
    """Blocks are ordered; A[name] stacks one symmetric matrix per equality
    row, F holds the free-variable columns of those rows."""
    block_names: list
    block_sizes: list
    A: dict                      # name -> (m, nb, nb)
    C: dict                      # name -> (nb, nb)
    b: np.ndarray                # (m,)
    F: np.ndarray | None = None  # (m, p)
    d: np.ndarray | None = None  # (p,)
    logdet_block: str | None = None
    logdet_weight: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = len(self.b)
        if self.F is None:
            self.F = np.zeros((m, 0))
        self.F = np.asarray(self.F, dtype=float).reshape(m, -1)
        if self.d is None:
            self.d = np.zeros(self.F.shape[1])
        self.d = np.asarray(self.d, dtype=float).ravel()
        if self.d.shape[0] != self.F.shape[1]:
            raise SdpError("objective d must match free variable count")
        if len(self.block_names) != len(self.block_sizes):
            raise SdpError("block_names and block_sizes disagree")
        for name, size in zip(self.block_names, self.block_sizes):
            T = np.asarray(self.A.get(name), dtype=float)
            if T.shape != (m, size, size):
                raise SdpError(f"A[{name}] must have shape ({m},{size},{size})")
            self.A[name] = (T + T.transpose(0, 2, 1)) / 2.0
            Cb = np.asarray(self.C.get(name, np.zeros((size, size))), dtype=float)
            self.C[name] = (Cb + Cb.T) / 2.0
        if self.logdet_block is not None:
            if self.logdet_block not in self.block_names:
                raise SdpError(f"unknown logdet block {self.logdet_block!r}")
            if self.logdet_weight <= 0:
                raise SdpError("logdet weight must be positive")

    @property
    def num_rows(self):
        return len(self.b)

    @property
    def num_free(self):
        return self.F.shape[1]


@dataclass
class SdpSolution:
    status: str
    X: dict
    free: np.ndarray
    y: np.ndarray
    S: dict
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    info: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# presolve

class _Internal:
    """Presolved data: scaled independent rows, pruned free columns."""

    def __init__(self, problem):
        self.names = list(problem.block_names)
        self.sizes = list(problem.block_sizes)
        self.T = [problem.A[n] for n in self.names]
        self.Cb = [problem.C[n] for n in self.names]
        self.F = problem.F
        self.d = problem.d
        self.b = problem.b
        self.logdet_index = (self.names.index(problem.logdet_block)
                             if problem.logdet_block is not None else None)
        self.logdet_weight = problem.logdet_weight
        self.kept_rows = np.arange(len(self.b))
        self.row_scale = np.ones(len(self.b))
        self.kept_free = np.arange(self.F.shape[1])
        self.orig_rows = len(self.b)
        self.orig_free = self.F.shape[1]
        self.infeasible_certificate = None

    def flatten_rows(self):
        parts = [T.reshape(T.shape[0], -1) for T in self.T]
        parts.append(self.F)
        return np.hstack(parts) if parts else np.zeros((len(self.b), 0))


def _presolve(problem, settings):
    it = _Internal(problem)
    m = len(it.b)
    rows = it.flatten_rows()
    norms = np.max(np.abs(rows), axis=1) if rows.shape[1] else np.zeros(m)

    # zero rows: inconsistent right-hand side means outright infeasibility
    zero = norms == 0.0
    if zero.any():
        bad = zero & (np.abs(it.b) > settings.feas_tol)
        if bad.any():
            cert = np.zeros(m)
            i = int(np.argmax(bad))
            cert[i] = math.copysign(1.0, it.b[i])
            it.infeasible_certificate = cert
            return it
        keep = ~zero
        it.kept_rows = np.nonzero(keep)[0]
        it.T = [T[keep] for T in it.T]
        it.F = it.F[keep]
        it.b = it.b[keep]
        rows = rows[keep]
        norms = norms[keep]
        m = len(it.b)

    # exact duplicate rows (common in moment-side compilations)
    seen = {}
    keep_mask = np.ones(m, dtype=bool)
    for i in range(m):
        key = rows[i].tobytes()
        j = seen.get(key)
        if j is None:
            seen[key] = i
        else:
            if abs(it.b[i] - it.b[j]) > settings.feas_tol * (1 + abs(it.b[j])):
                cert = np.zeros(it.orig_rows)
                oi, oj = it.kept_rows[i], it.kept_rows[j]
                sign = math.copysign(1.0, it.b[i] - it.b[j])
                cert[oi] = sign
                cert[oj] = -sign
                it.infeasible_certificate = cert
                return it
            keep_mask[i] = False
    if not keep_mask.all():
        it.kept_rows = it.kept_rows[keep_mask]
        it.T = [T[keep_mask] for T in it.T]
        it.F = it.F[keep_mask]
        it.b = it.b[keep_mask]
        rows = rows[keep_mask]
        norms = norms[keep_mask]
        m = len(it.b)

    # rank reduction for linearly dependent rows unless the producer vouches
    if not problem.meta.get("rows_independent", False) and m > 1:
        q, r, piv = scipy.linalg.qr(rows.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        tol = diag[0] * max(rows.shape) * np.finfo(float).eps * 10 if diag.size else 0.0
        rank = int(np.sum(diag > tol))
        if rank < m:
            keep_idx = np.sort(piv[:rank])
            it.kept_rows = it.kept_rows[keep_idx]
            it.T = [T[keep_idx] for T in it.T]
            it.F = it.F[keep_idx]
            it.b = it.b[keep_idx]
            rows = rows[keep_idx]
            norms = norms[keep_idx]
            m = len(it.b)

    # row equilibration
    scale = np.where(norms > 0, norms, 1.0)
    it.row_scale = scale
    it.T = [T / scale[:, None, None] for T in it.T]
    it.F = it.F / scale[:, None] if it.F.size else it.F
    it.b = it.b / scale

    # prune dependent free columns so the KKT system stays nonsingular
    p = it.F.shape[1]
    if p:
        qf, rf, pivf = scipy.linalg.qr(it.F, mode="economic", pivoting=True)
        diag = np.abs(np.diag(rf))
        tolf = (diag[0] if diag.size else 0.0) * max(it.F.shape) * np.finfo(float).eps * 10
        rankf = int(np.sum(diag > tolf))
        if rankf < p:
            it.kept_free = np.sort(pivf[:rankf])
            it.F = it.F[:, it.kept_free]
            it.d = it.d[it.kept_free]
    return it


# ----------------------------------------------------------------------
# shared linear algebra helpers

def _nt_scaling(X, S):
    """W with W S W = X, its symmetric square root D and inverse."""
    Lx = np.linalg.cholesky(X)
    Ls = np.linalg.cholesky(S)
    U, sig, Vt = np.linalg.svd(Ls.T @ Lx)
    T = Lx @ (Vt.T / np.sqrt(sig))
    W = T @ T.T
    lam, Q = np.linalg.eigh(W)
    lam = np.clip(lam, 1e-300, None)
    root = np.sqrt(lam)
    D = (Q * root) @ Q.T
    Dinv = (Q / root) @ Q.T
    return W, D, Dinv


def _lyap_solve(rhs, lam, Q):
    """Unique symmetric M with (M V + V M)/2 = rhs, V = Q diag(lam) Q'."""
    Rt = Q.T @ rhs @ Q
    M = Rt * (2.0 / (lam[:, None] + lam[None, :]))
    return Q @ M @ Q.T


def _max_step_psd(X, dX):
    """Largest alpha with X + alpha dX still PSD (inf if unconstrained)."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    M = scipy.linalg.solve_triangular(L, dX, lower=True)
    M = scipy.linalg.solve_triangular(L, M.T, lower=True)
    lam_min = float(np.linalg.eigvalsh((M + M.T) / 2.0)[0])
    if lam_min >= 0.0:
        return np.inf
    return 1.0 / (-lam_min)


def _sym(M):
    return (M + M.T) / 2.0


def _apply_A(T_list, X_list):
    out = None
    for T, X in zip(T_list, X_list):
        v = np.tensordot(T, X, axes=([1, 2], [0, 1]))
        out = v if out is None else out + v
    if out is None:
        out = np.zeros(0)
    return out


def _apply_At(T_list, y):
    return [np.tensordot(y, T, axes=1) for T in T_list]


def _schur(T_list, W_list):
    """M[i,j] = sum_b tr(A_ib W_b A_jb W_b) plus the per-block W A W stacks."""
    m = T_list[0].shape[0] if T_list else 0
    M = np.zeros((m, m))
    WTW = []
    for T, W in zip(T_list, W_list):
        tw = np.matmul(np.matmul(W, T), W)
        WTW.append(tw)
        M += np.tensordot(tw, T, axes=([1, 2], [1, 2]))
    return _sym(M), WTW


# ----------------------------------------------------------------------
# homogeneous self-dual embedding (linear objective)

def _solve_hsde(it, settings):
    nb = len(it.sizes)
    m = len(it.b)
    p = it.F.shape[1]
    total_dim = sum(it.sizes)
    nu = total_dim + 1

    X = [np.eye(n) for n in it.sizes]
    S = [np.eye(n) for n in it.sizes]
    z = np.zeros(p)
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0

    b, d, F = it.b, it.d, it.F
    Cn = it.Cb
    norm_b = 1.0 + np.linalg.norm(b)
    norm_c = 1.0 + math.sqrt(sum(np.sum(Cb * Cb) for Cb in Cn) + float(d @ d))

    best = None
    best_score = np.inf
    slow_steps = 0
    status = ITER_LIMIT
    iters_done = settings.max_iterations

    for it_no in range(settings.max_iterations):
        AX = _apply_A(it.T, X)
        Aty = _apply_At(it.T, y)
        cX = sum(np.sum(Cb * Xb) for Cb, Xb in zip(Cn, X)) + float(d @ z)
        by = float(b @ y)

        rp = AX + (F @ z if p else 0.0) - b * tau
        rd = [-At - Sb + Cb * tau for At, Sb, Cb in zip(Aty, S, Cn)]
        rf = -(F.T @ y) + d * tau if p else np.zeros(0)
        rg = by - cX - kappa
        mu = (sum(np.sum(Xb * Sb) for Xb, Sb in zip(X, S)) + tau * kappa) / nu

        # de-homogenized convergence test
        pres = np.linalg.norm(AX / tau + (F @ z / tau if p else 0.0) - b) / norm_b
        dres_blocks = max((np.linalg.norm(Cb - At / tau - Sb / tau)
                           for Cb, At, Sb in zip(Cn, Aty, S)), default=0.0)
        dres_free = np.linalg.norm(d - F.T @ y / tau) if p else 0.0
        dres = max(dres_blocks, dres_free) / norm_c
        pobj = cX / tau
        dobj = by / tau
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        score = max(pres, dres, gap)
        if score < best_score:
            best_score = score
            best = ([Xb / tau for Xb in X], z / tau, y / tau,
                    [Sb / tau for Sb in S], pobj, dobj, gap, pres, dres, it_no)
        if pres <= settings.feas_tol and dres <= settings.feas_tol and gap <= settings.gap_tol:
            status = OPTIMAL
            iters_done = it_no
            break

        # infeasibility certificates
        fired = _check_certificates(it, X, z, y, S, tau, kappa, by, cX,
                                    norm_b, norm_c, settings)
        if fired is not None:
            return fired + (it_no,)

        # NT scalings
        Wd = [_nt_scaling(Xb, Sb) for Xb, Sb in zip(X, S)]
        W = [w[0] for w in Wd]
        M, WTW = _schur(it.T, W)
        h = np.array([sum(np.sum(tw_i * Cb) for tw_i, Cb in
                          zip((WTW[bi][i] for bi in range(nb)), Cn))
                      for i in range(m)]) if m else np.zeros(0)
        gcc = sum(np.sum(Cb * (W[bi] @ Cb @ W[bi])) for bi, Cb in enumerate(Cn))

        K = np.zeros((m + p + 1, m + p + 1))
        K[:m, :m] = M
        if p:
            K[:m, m:m + p] = F
            K[m:m + p, :m] = -F.T
            K[m:m + p, -1] = d
            K[-1, m:m + p] = -d
        K[:m, -1] = -(h + b)
        K[-1, :m] = (b - h)
        K[-1, -1] = gcc + kappa / tau
        try:
            lu = scipy.linalg.lu_factor(K)
        except (scipy.linalg.LinAlgError, ValueError):
            K[np.diag_indices_from(K)] += 1e-12
            lu = scipy.linalg.lu_factor(K)

        def newton(eta, R_list, rtk):
            WrdW = [W[bi] @ rd[bi] @ W[bi] for bi in range(nb)]
            AR = _apply_A(it.T, R_list)
            AWrdW = _apply_A(it.T, WrdW)
            q1 = -eta * rp - AR + eta * AWrdW
            q2 = -eta * rf
            CR = sum(np.sum(Cb * Rb) for Cb, Rb in zip(Cn, R_list))
            CWrdW = sum(np.sum(Cb * Wb) for Cb, Wb in zip(Cn, WrdW))
            q3 = -eta * rg + CR - eta * CWrdW + rtk / tau
            rhs = np.concatenate([q1, q2, [q3]])
            sol = scipy.linalg.lu_solve(lu, rhs)
            dy = sol[:m]
            dz = sol[m:m + p]
            dtau = sol[-1]
            dAty = _apply_At(it.T, dy)
            dS = [-dAty[bi] + Cn[bi] * dtau + eta * rd[bi] for bi in range(nb)]
            dX = [_sym(R_list[bi] - W[bi] @ dS[bi] @ W[bi]) for bi in range(nb)]
            dkappa = (rtk - kappa * dtau) / tau
            return dX, dz, dy, dS, dtau, dkappa

        def max_alpha(dX, dS, dtau, dkappa):
            a = np.inf
            for bi in range(nb):
                a = min(a, _max_step_psd(X[bi], dX[bi]), _max_step_psd(S[bi], dS[bi]))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        # predictor
        R_aff = [-Xb for Xb in X]
        aff = newton(1.0, R_aff, -tau * kappa)
        a_aff = min(1.0, _STEP_FRACTION * max_alpha(aff[0], aff[3], aff[4], aff[5]))
        mu_aff = (sum(np.sum((X[bi] + a_aff * aff[0][bi]) * (S[bi] + a_aff * aff[3][bi]))
                      for bi in range(nb))
                  + (tau + a_aff * aff[4]) * (kappa + a_aff * aff[5])) / nu
        sigma = min(max((max(mu_aff, 0.0) / mu) ** 3, 1e-10), 1.0 - 1e-10)

        # corrector
        R_corr = []
        for bi in range(nb):
            _, D, Dinv = Wd[bi]
            Vm = _sym(Dinv @ X[bi] @ Dinv)
            lam, Q = np.linalg.eigh(Vm)
            lam = np.clip(lam, 1e-300, None)
            dXa = Dinv @ aff[0][bi] @ Dinv
            dSa = D @ aff[3][bi] @ D
            rhs_v = sigma * mu * np.eye(it.sizes[bi]) - Vm @ Vm - _sym(dXa @ dSa)
            R_corr.append(_sym(D @ _lyap_solve(_sym(rhs_v), lam, Q) @ D))
        rtk = sigma * mu - tau * kappa - aff[4] * aff[5]
        step = newton(1.0, R_corr, rtk)
        alpha = min(1.0, _STEP_FRACTION * max_alpha(step[0], step[3], step[4], step[5]))
        if alpha < 1e-4:
            slow_steps += 1
            if slow_steps >= 3:
                status = INACCURATE
                iters_done = it_no
                break
        else:
            slow_steps = 0
        for bi in range(nb):
            X[bi] = _sym(X[bi] + alpha * step[0][bi])
            S[bi] = _sym(S[bi] + alpha * step[3][bi])
        z = z + alpha * step[1]
        y = y + alpha * step[2]
        tau += alpha * step[4]
        kappa += alpha * step[5]

    Xs, zs, ys, Ss, pobj, dobj, gap, pres, dres, _ = best
    if status == ITER_LIMIT and best_score <= 100 * max(settings.feas_tol, settings.gap_tol):
        status = INACCURATE
    return (status, Xs, zs, ys, Ss, pobj, dobj, gap, pres, dres, iters_done)


def _check_certificates(it, X, z, y, S, tau, kappa, by, cX, norm_b, norm_c, settings):
    """Farkas-style rays for primal infeasibility / primal unboundedness."""
    p = it.F.shape[1]
    ratio_fire = tau <= settings.infeas_threshold * max(kappa, 1e-300)
    tol_tight = settings.feas_tol
    tol_loose = math.sqrt(settings.feas_tol)

    if by > 0:
        yn = [Sb / by for Sb in S]
        ray = y / by
        res = max((np.linalg.norm(At + Sn) for At, Sn in
                   zip(_apply_At(it.T, ray), yn)), default=0.0)
        if p:
            res = max(res, np.linalg.norm(it.F.T @ ray))
        res /= norm_c
        if res <= tol_tight or (ratio_fire and res <= tol_loose):
            return (PRIMAL_INFEASIBLE,
                    [Xb / tau for Xb in X], z / tau, ray, yn,
                    np.nan, np.nan, np.nan, res, res)
    gamma = -cX
    if gamma > 0:
        Xr = [Xb / gamma for Xb in X]
        zr = z / gamma
        res = np.linalg.norm(_apply_A(it.T, Xr) + (it.F @ zr if p else 0.0)) / norm_b
        if res <= tol_tight or (ratio_fire and res <= tol_loose):
            return (DUAL_UNBOUNDED, Xr, zr, y / max(tau, 1e-300),
                    [Sb / max(tau, 1e-300) for Sb in S],
                    -np.inf, -np.inf, np.nan, res, res)
    return None


# ----------------------------------------------------------------------
# direct path-following with a log-det block (always feasible problems)

def _solve_logdet(it, settings):
    nb = len(it.sizes)
    m = len(it.b)
    p = it.F.shape[1]
    w = np.zeros(nb)
    w[it.logdet_index] = it.logdet_weight
    total_dim = sum(it.sizes)

    X = [np.eye(n) for n in it.sizes]
    S = [np.eye(n) for n in it.sizes]
    z = np.zeros(p)
    y = np.zeros(m)
    b, d, F = it.b, it.d, it.F
    Cn = it.Cb
    norm_b = 1.0 + np.linalg.norm(b)
    norm_c = 1.0 + math.sqrt(sum(np.sum(Cb * Cb) for Cb in Cn) + float(d @ d))
    wn = float(w @ np.array(it.sizes))

    status = ITER_LIMIT
    iters_done = settings.max_iterations
    slow_steps = 0

    for it_no in range(settings.max_iterations):
        AX = _apply_A(it.T, X)
        Aty = _apply_At(it.T, y)
        rp = b - AX - (F @ z if p else 0.0)
        rd = [Cb - At - Sb for Cb, At, Sb in zip(Cn, Aty, S)]
        rf = d - (F.T @ y) if p else np.zeros(0)
        comp = sum(np.sum(Xb * Sb) for Xb, Sb in zip(X, S))
        mu_hat = max(comp - wn, 0.0) / total_dim

        pres = np.linalg.norm(rp) / norm_b
        dres = max(max((np.linalg.norm(r) for r in rd), default=0.0),
                   np.linalg.norm(rf) if p else 0.0) / norm_c
        pobj = (sum(np.sum(Cb * Xb) for Cb, Xb in zip(Cn, X)) + float(d @ z)
                - sum(w[bi] * _logdet(X[bi]) for bi in range(nb) if w[bi] > 0))
        gap_rel = mu_hat * total_dim / (1.0 + abs(pobj))
        if pres <= settings.feas_tol and dres <= settings.feas_tol \
                and gap_rel <= settings.gap_tol:
            status = OPTIMAL
            iters_done = it_no
            break

        Wd = [_nt_scaling(Xb, Sb) for Xb, Sb in zip(X, S)]
        W = [wd[0] for wd in Wd]
        M, WTW = _schur(it.T, W)
        K = np.zeros((m + p, m + p))
        K[:m, :m] = M
        if p:
            K[:m, m:] = F
            K[m:, :m] = F.T
        try:
            lu = scipy.linalg.lu_factor(K) if K.size else None
        except (scipy.linalg.LinAlgError, ValueError):
            K[np.diag_indices_from(K)] += 1e-12
            lu = scipy.linalg.lu_factor(K)

        def newton(R_list):
            WrdW = [W[bi] @ rd[bi] @ W[bi] for bi in range(nb)]
            q1 = rp - _apply_A(it.T, R_list) + _apply_A(it.T, WrdW)
            rhs = np.concatenate([q1, rf])
            if lu is not None and rhs.size:
                sol = scipy.linalg.lu_solve(lu, rhs)
            else:
                sol = rhs * 0.0
            dy = sol[:m]
            dz = sol[m:]
            dAty = _apply_At(it.T, dy)
            dS = [rd[bi] - dAty[bi] for bi in range(nb)]
            dX = [_sym(R_list[bi] - W[bi] @ dS[bi] @ W[bi]) for bi in range(nb)]
            return dX, dz, dy, dS

        def max_alpha(dX, dS):
            a = np.inf
            for bi in range(nb):
                a = min(a, _max_step_psd(X[bi], dX[bi]), _max_step_psd(S[bi], dS[bi]))
            return a

        # predictor: target X S = w I on the designated block, 0 elsewhere
        R_aff = []
        scal = []
        for bi in range(nb):
            _, D, Dinv = Wd[bi]
            Vm = _sym(Dinv @ X[bi] @ Dinv)
            lam, Q = np.linalg.eigh(Vm)
            lam = np.clip(lam, 1e-300, None)
            scal.append((D, Dinv, Vm, lam, Q))
            rhs_v = w[bi] * np.eye(it.sizes[bi]) - Vm @ Vm
            R_aff.append(_sym(D @ _lyap_solve(_sym(rhs_v), lam, Q) @ D))
        aff = newton(R_aff)
        a_aff = min(1.0, _STEP_FRACTION * max_alpha(aff[0], aff[3]))
        comp_aff = sum(np.sum((X[bi] + a_aff * aff[0][bi]) * (S[bi] + a_aff * aff[3][bi]))
                       for bi in range(nb))
        mu_aff = max(comp_aff - wn, 0.0) / total_dim
        if mu_hat > 1e-300:
            sigma = min(max((mu_aff / mu_hat) ** 3, 1e-10), 1.0 - 1e-10)
        else:
            sigma = 0.1

        R_corr = []
        for bi in range(nb):
            D, Dinv, Vm, lam, Q = scal[bi]
            dXa = Dinv @ aff[0][bi] @ Dinv
            dSa = D @ aff[3][bi] @ D
            rhs_v = ((sigma * mu_hat + w[bi]) * np.eye(it.sizes[bi])
                     - Vm @ Vm - _sym(dXa @ dSa))
            R_corr.append(_sym(D @ _lyap_solve(_sym(rhs_v), lam, Q) @ D))
        step = newton(R_corr)
        alpha = min(1.0, _STEP_FRACTION * max_alpha(step[0], step[3]))
        if alpha < 1e-4:
            slow_steps += 1
            if slow_steps >= 3:
                status = INACCURATE
                iters_done = it_no
                break
        else:
            slow_steps = 0
        for bi in range(nb):
            X[bi] = _sym(X[bi] + alpha * step[0][bi])
            S[bi] = _sym(S[bi] + alpha * step[3][bi])
        z = z + alpha * step[1]
        y = y + alpha * step[2]

    pobj = (sum(np.sum(Cb * Xb) for Cb, Xb in zip(Cn, X)) + float(d @ z)
            - sum(w[bi] * _logdet(X[bi]) for bi in range(nb) if w[bi] > 0))
    dobj = float(b @ y)
    for bi in range(nb):
        if w[bi] > 0:
            wv = w[bi]
            dobj += wv * _logdet(S[bi]) + it.sizes[bi] * wv * (1.0 - math.log(wv))
    AX = _apply_A(it.T, X)
    pres = np.linalg.norm(b - AX - (F @ z if p else 0.0)) / norm_b
    Aty = _apply_At(it.T, y)
    dres = max(max((np.linalg.norm(Cb - At - Sb)
                    for Cb, At, Sb in zip(Cn, Aty, S)), default=0.0),
               np.linalg.norm(d - F.T @ y) if p else 0.0) / norm_c
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return (status, X, z, y, S, pobj, dobj, gap, pres, dres, iters_done)


def _logdet(M):
    sign, val = np.linalg.slogdet(M)
    return val if sign > 0 else -np.inf


# ----------------------------------------------------------------------
# public API

def solve_sdp(problem, settings=None):
    """Solve an SdpProblem; see the module docstring for the formulation."""
    settings = settings or SolverSettings()
    it = _presolve(problem, settings)
    m_orig = it.orig_rows

    if it.infeasible_certificate is not None:
        y = it.infeasible_certificate
        X = {n: np.zeros((s, s)) for n, s in zip(problem.block_names, problem.block_sizes)}
        return SdpSolution(PRIMAL_INFEASIBLE, X, np.zeros(problem.num_free), y,
                           dict(X), np.nan, np.nan, np.nan, 0.0, 0.0, 0,
                           info={"presolve": "inconsistent rows"})

    if problem.logdet_block is not None:
        raw = _solve_logdet(it, settings)
    else:
        raw = _solve_hsde(it, settings)
    status, Xs, zs, ys, Ss, pobj, dobj, gap, pres, dres, iters = raw

    X = {n: Xs[i] for i, n in enumerate(it.names)}
    S = {n: Ss[i] for i, n in enumerate(it.names)}
    free = np.zeros(it.orig_free)
    if it.kept_free.size:
        free[it.kept_free] = zs
    y_full = np.zeros(m_orig)
    y_full[it.kept_rows] = ys / it.row_scale
    return SdpSolution(status, X, free, y_full, S, pobj, dobj, gap, pres, dres,
                       iters, info={"kept_rows": len(it.kept_rows),
                                    "dropped_rows": m_orig - len(it.kept_rows)})


@dataclass
class CertifyReport:
    primal_residual: float
    dual_residual: float
    complementarity: float
    min_eigenvalue: float
    status_consistent: bool
    details: dict = field(default_factory=dict)


def certify(solution, problem, settings=None):
    """Recompute residuals from scratch on the original (unscaled) data and
    flag disagreement with the reported status."""
    settings = settings or SolverSettings()
    X = [solution.X[n] for n in problem.block_names]
    S = [solution.S[n] for n in problem.block_names]
    T = [problem.A[n] for n in problem.block_names]
    C = [problem.C[n] for n in problem.block_names]
    z = solution.free
    y = solution.y
    AX = _apply_A(T, X)
    p = problem.num_free
    rp = AX + (problem.F @ z if p else 0.0) - problem.b
    pres = np.linalg.norm(rp) / (1.0 + np.linalg.norm(problem.b))
    Aty = _apply_At(T, y)
    dual_mats = []
    for bi, name in enumerate(problem.block_names):
        resid = C[bi] - Aty[bi] - S[bi]
        if name == problem.logdet_block:
            # stationarity for the log-det block: C - A*(y) - S = 0 still holds
            # in our convention because S absorbs w X^{-1} on the central path
            pass
        dual_mats.append(np.linalg.norm(resid))
    dres_free = np.linalg.norm(problem.d - problem.F.T @ y) if p else 0.0
    norm_c = 1.0 + math.sqrt(sum(np.sum(Cb * Cb) for Cb in C) + float(problem.d @ problem.d))
    dres = max(max(dual_mats, default=0.0), dres_free) / norm_c
    comp = sum(abs(np.sum(Xb * Sb)) for Xb, Sb in zip(X, S))
    if problem.logdet_block is not None:
        bi = problem.block_names.index(problem.logdet_block)
        comp = abs(comp - problem.logdet_weight * problem.block_sizes[bi]
                   - 2 * sum(np.sum(X[i] * S[i]) for i in range(len(X)) if i != bi))
        comp = abs(sum(np.sum(X[i] * S[i]) for i in range(len(X)) if i != bi)) + comp
    min_eig = min((float(np.linalg.eigvalsh(Xb)[0]) for Xb in X), default=0.0)
    tol = 100 * max(settings.feas_tol, settings.gap_tol)
    consistent = True
    if solution.status == OPTIMAL:
        consistent = pres <= tol and dres <= tol and min_eig >= -1e-9
    return CertifyReport(pres, dres, comp, min_eig, consistent,
                         details={"dual_block_residuals": dual_mats})


solve = solve_sdp
