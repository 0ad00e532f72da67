"""Dense primal-dual interior-point solver for small block SDPs.

Problems are stated in linear-matrix-inequality form::

    minimize    c'z + c0
    subject to  F0_j + sum_i z_i F_ij  >= 0   (PSD, every block j)
                G z + h >= 0                 (elementwise)
                A z = b

The associated dual is ``max -sum_j <F0_j, X_j> - h'x + b'nu + c0`` over
``X_j >= 0, x >= 0`` with ``c = sum_j A_j*(X_j) + G'x + A'nu``.

Search directions use Nesterov-Todd scaling with a Mehrotra
predictor-corrector and separate primal/dual step lengths from an
infeasible start.  The reduced (Schur complement) system is factored by
Cholesky, with a QR fallback when it loses definiteness.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class Segment:
    """A named slice of the decision vector holding a moment sequence."""

    offset: int
    num_vars: int
    max_degree: int
    size: int


@dataclass
class AffineBlock:
    """Symmetric matrix ``F0 + sum_k z[index[k]] * F[k]``.

    Only the decision variables listed in ``index`` enter the block.
    """

    name: str
    F0: np.ndarray
    F: np.ndarray
    index: np.ndarray

    @property
    def side(self) -> int:
        return self.F0.shape[0]

    def value(self, z: np.ndarray) -> np.ndarray:
        return self.F0 + np.tensordot(z[self.index], self.F, axes=1)

    def adjoint(self, X: np.ndarray, m: int) -> np.ndarray:
        out = np.zeros(m)
        out[self.index] = np.einsum("kab,ab->k", self.F, X)
        return out

    def is_symmetric(self) -> bool:
        return (np.array_equal(self.F0, self.F0.T)
                and np.array_equal(self.F, self.F.transpose(0, 2, 1)))

    @classmethod
    def from_dense(cls, name: str, F0: np.ndarray, F: np.ndarray, tol: float = 0.0) -> "AffineBlock":
        """Build from a full ``(m, s, s)`` coefficient stack, keeping nonzero slices."""
        F0 = 0.5 * (F0 + F0.T)
        F = 0.5 * (F + F.transpose(0, 2, 1))
        keep = np.flatnonzero(np.abs(F).reshape(F.shape[0], -1).max(axis=1) > tol)
        return cls(name, F0, np.ascontiguousarray(F[keep]), keep)


@dataclass
class SdpProblem:
    num_vars: int
    c: np.ndarray
    blocks: list
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    c0: float = 0.0
    segments: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        m = self.num_vars
        self.c = np.asarray(self.c, dtype=float).reshape(m)
        if self.G is None:
            self.G, self.h = np.zeros((0, m)), np.zeros(0)
        if self.A is None:
            self.A, self.b = np.zeros((0, m)), np.zeros(0)
        self.G = np.asarray(self.G, dtype=float).reshape(-1, m)
        self.h = np.asarray(self.h, dtype=float).reshape(-1)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, m)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if m < 1:
            raise ValueError("SDP needs at least one decision variable")
        for blk in self.blocks:
            if blk.F.shape[1:] != blk.F0.shape or blk.F0.shape[0] != blk.F0.shape[1]:
                raise ValueError(f"block {blk.name!r} has inconsistent shapes")

    def objective(self, z) -> float:
        return float(self.c @ z + self.c0)

    def block_values(self, z) -> list[np.ndarray]:
        return [blk.value(np.asarray(z, dtype=float)) for blk in self.blocks]

    def segment(self, z, name) -> np.ndarray:
        seg = self.segments[name]
        return np.asarray(z)[seg.offset:seg.offset + seg.size]


@dataclass(frozen=True)
class SolverSettings:
    feas_tol: float = 1e-7
    gap_tol: float = 1e-7
    max_iter: int = 200
    step_safeguard: float = 0.95

    def __post_init__(self):
        if self.feas_tol <= 0 or self.gap_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.step_safeguard < 1.0:
            raise ValueError("step_safeguard must lie in (0, 1)")


@dataclass
class SdpSolution:
    status: str
    z: np.ndarray
    objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    X: list = field(default_factory=list, repr=False)
    x: np.ndarray | None = field(default=None, repr=False)
    nu: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def psd_check(matrix, tol: float = 1e-8):
    """``(is_psd, lambda_min)`` for a symmetric matrix."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > 1e-12 * max(1.0, np.max(np.abs(M)) if M.size else 1.0):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    if M.size == 0:
        return True, np.inf
    lam = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    return lam >= -tol, lam


def _max_step_vec(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not neg.any():
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _sym(M):
    return 0.5 * (M + M.T)


def _nt_scaling(X, S):
    """Nesterov-Todd factor ``G`` with ``G'SG = G^-1 X G^-T = diag(lam)``."""
    Lx = np.linalg.cholesky(X)
    Ls = np.linalg.cholesky(S)
    U, lam, _ = np.linalg.svd(Lx.T @ Ls)
    Gs = Lx @ U / np.sqrt(lam)
    return Gs, lam


def _max_step_diag(lam: np.ndarray, dM: np.ndarray) -> float:
    """Largest t with diag(lam) + t dM PSD."""
    r = 1.0 / np.sqrt(lam)
    W = dM * r[:, None] * r[None, :]
    mn = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return np.inf if mn >= 0 else -1.0 / mn


def _null_basis(p: SdpProblem):
    """Orthonormal basis of the decision directions that leave every
    constraint unchanged, or None when the constraint map is injective."""
    m = p.num_vars
    cols = []
    for blk in p.blocks:
        Fm = np.zeros((m, blk.side * blk.side))
        Fm[blk.index] = blk.F.reshape(blk.index.size, -1)
        cols.append(Fm)
    cols += [p.G.T, p.A.T]
    M = np.hstack(cols)
    if M.shape[1] == 0:
        return np.eye(m)
    if M.shape[1] < m:
        M = np.hstack([M, np.zeros((m, m - M.shape[1]))])
    U, sv, _ = np.linalg.svd(M, full_matrices=False)
    tol = max(M.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    if rank == m:
        return None
    return U[:, rank:]


class _State:
    def __init__(self, z, S, s, X, x, nu):
        self.z, self.S, self.s, self.X, self.x, self.nu = z, S, s, X, x, nu


def _residuals(p: SdpProblem, st: _State):
    Rs = [blk.value(st.z) - S for blk, S in zip(p.blocks, st.S)]
    rl = p.G @ st.z + p.h - st.s
    req = p.b - p.A @ st.z
    aty = np.zeros(p.num_vars)
    for blk, X in zip(p.blocks, st.X):
        aty += blk.adjoint(X, p.num_vars)
    rd = p.c - aty - p.G.T @ st.x - p.A.T @ st.nu
    return Rs, rl, req, rd


def _objectives(p: SdpProblem, st: _State):
    pobj = float(p.c @ st.z) + p.c0
    dobj = (-sum(float(np.vdot(blk.F0, X)) for blk, X in zip(p.blocks, st.X))
            - float(p.h @ st.x) + float(p.b @ st.nu) + p.c0)
    return pobj, dobj


def _measures(p: SdpProblem, st: _State, Rs, rl, req, rd):
    nF0 = np.sqrt(sum(np.sum(blk.F0 ** 2) for blk in p.blocks))
    pres = max(
        [np.linalg.norm(R) for R in Rs] + [0.0]
    ) / (1.0 + nF0)
    if rl.size:
        pres = max(pres, np.linalg.norm(rl) / (1.0 + np.linalg.norm(p.h)))
    if req.size:
        pres = max(pres, np.linalg.norm(req) / (1.0 + np.linalg.norm(p.b)))
    dres = np.linalg.norm(rd) / (1.0 + np.linalg.norm(p.c))
    pobj, dobj = _objectives(p, st)
    compl = sum(float(np.vdot(X, S)) for X, S in zip(st.X, st.S)) + float(st.x @ st.s)
    gap = max(abs(pobj - dobj), abs(compl)) / (1.0 + abs(pobj) + abs(dobj))
    return pres, dres, gap, pobj, dobj, compl


def _initial_point(p: SdpProblem) -> _State:
    m = p.num_vars
    scale_c = 1.0 + np.linalg.norm(p.c)
    X, S = [], []
    for blk in p.blocks:
        n = blk.side
        nF = np.sqrt(np.sum(blk.F ** 2, axis=(1, 2))) if blk.F.size else np.zeros(1)
        xi = max(1.0, np.sqrt(n), n * np.max((1.0 + np.abs(p.c[blk.index])) / (1.0 + nF))
                 if blk.index.size else 1.0)
        eta = max(1.0, np.sqrt(n), np.linalg.norm(blk.F0), np.max(nF) if nF.size else 1.0)
        X.append(xi * np.eye(n))
        S.append(eta * np.eye(n))
    k = p.G.shape[0]
    x = np.full(k, max(1.0, scale_c / max(1, k)))
    s = np.full(k, max(1.0, np.max(np.abs(p.h)) if k else 1.0))
    return _State(np.zeros(m), S, s, X, x, np.zeros(p.A.shape[0]))


def solve(problem: SdpProblem, settings: SolverSettings | None = None) -> SdpSolution:
    """Solve ``problem``; never raises on infeasible/unbounded/stalled input."""
    settings = settings or SolverSettings()
    p = problem
    m = p.num_vars
    st = _initial_point(p)
    nblk_dim = sum(blk.side for blk in p.blocks) + p.G.shape[0]
    null_basis = _null_basis(p)
    best = None
    stall = 0
    status = MAX_ITERATIONS
    it = 0

    def pack(status_, it_):
        Rs, rl, req, rd = _residuals(p, st)
        pres, dres, gap, pobj, dobj, _ = _measures(p, st, Rs, rl, req, rd)
        return SdpSolution(status_, st.z.copy(), pobj, dobj, pres, dres, gap, it_,
                           [X.copy() for X in st.X], st.x.copy(), st.nu.copy())

    for it in range(1, settings.max_iter + 1):
        Rs, rl, req, rd = _residuals(p, st)
        pres, dres, gap, pobj, dobj, compl = _measures(p, st, Rs, rl, req, rd)
        if not all(np.isfinite([pres, dres, gap, pobj, dobj])):
            status = NUMERICAL_FAILURE
            break
        log.debug("it %3d pobj %+.8e dobj %+.8e pres %.2e dres %.2e gap %.2e",
                  it, pobj, dobj, pres, dres, gap)
        if pres <= settings.feas_tol and dres <= settings.feas_tol and gap <= settings.gap_tol:
            return pack(OPTIMAL, it - 1)
        merit = max(pres, dres, gap)
        if best is None or merit < best[0]:
            best = (merit, _State(st.z.copy(), [S.copy() for S in st.S], st.s.copy(),
                                  [X.copy() for X in st.X], st.x.copy(), st.nu.copy()))

        # infeasibility certificates
        dual_raw = dobj - p.c0
        ray = np.linalg.norm(p.c - rd)
        if dual_raw > 0 and ray <= settings.feas_tol * dual_raw and dual_raw > 1e6:
            status = INFEASIBLE
            break
        primal_raw = -(pobj - p.c0)
        if primal_raw > 1e6:
            dz = st.z / primal_raw
            viol = 0.0
            for blk in p.blocks:
                D = np.tensordot(dz[blk.index], blk.F, axes=1)
                if D.size:
                    viol = max(viol, -np.linalg.eigvalsh(D)[0])
            if p.G.size:
                viol = max(viol, float(np.max(-(p.G @ dz), initial=0.0)))
            if p.A.size:
                viol = max(viol, float(np.linalg.norm(p.A @ dz)))
            if viol <= settings.feas_tol:
                status = UNBOUNDED
                break

        mu = compl / nblk_dim
        if pres <= 1e-3 * settings.feas_tol:
            # Primal residual far below tolerance: leave it where it is.
            # Correcting rounding-level residuals injects W Rs W into the
            # right-hand side, and W grows without bound as mu -> 0.
            Rs = [np.zeros_like(R) for R in Rs]
            rl = np.zeros_like(rl)
        try:
            scal = [_nt_scaling(X, S) for X, S in zip(st.X, st.S)]
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            break

        # Schur complement H = B'B, rows of B being svec(G'F_i G).  Cholesky of
        # H is tried first; a QR of B (no squaring of cond(H)) is the fallback.
        pieces = []
        H = np.zeros((m, m))
        for blk, (Gs, lam) in zip(p.blocks, scal):
            if not blk.index.size:
                continue
            iu, ju = np.triu_indices(blk.side)
            wt = np.where(iu == ju, 1.0, np.sqrt(2.0))
            Ft = (Gs.T @ blk.F @ Gs)[:, iu, ju] * wt
            pieces.append((blk.index, Ft))
            H[np.ix_(blk.index, blk.index)] += Ft @ Ft.T
        D = st.x / st.s if st.s.size else np.zeros(0)
        if p.G.size:
            H += (p.G.T * D) @ p.G
        scale_h = max(1.0, np.max(np.diag(H)))
        if null_basis is not None:
            # directions that move no constraint; pin them instead of letting
            # the factorization return arbitrary components along them
            H += scale_h * (null_basis @ null_basis.T)
        if p.A.size:
            # augmented Lagrangian term: H + rho A'A gives the same (dz, dnu)
            # once A dz is fixed, and is definite on directions only A sees
            rho = scale_h / max(1.0, np.max(np.sum(p.A ** 2, axis=1)))
            H += rho * (p.A.T @ p.A)
        try:
            Rfac = np.linalg.cholesky(_sym(H)).T
        except np.linalg.LinAlgError:
            Rfac = None
        if Rfac is None:
            B = np.zeros((sum(Ft.shape[1] for _, Ft in pieces), m))
            row = 0
            for index, Ft in pieces:
                B[row:row + Ft.shape[1], index] = Ft.T
                row += Ft.shape[1]
            if p.G.size:
                B = np.vstack([B, np.sqrt(D)[:, None] * p.G])
            if null_basis is not None:
                B = np.vstack([B, np.sqrt(scale_h) * null_basis.T])
            if p.A.size:
                B = np.vstack([B, np.sqrt(rho) * p.A])
            Rfac = np.linalg.qr(B, mode="r")
            dmax = max(1e-300, np.max(np.abs(np.diag(Rfac)))) if Rfac.size else 1.0
            if Rfac.shape[0] < m or np.min(np.abs(np.diag(Rfac))) < 1e-13 * dmax:
                Rfac = np.linalg.qr(np.vstack([B, 1e-12 * dmax * np.eye(m)]), mode="r")
        if not np.all(np.isfinite(Rfac)):
            status = NUMERICAL_FAILURE
            break

        def cho_solve_h(rhs):
            return sla.solve_triangular(Rfac, sla.solve_triangular(Rfac, rhs, trans="T"))

        if p.A.size:
            KA = cho_solve_h(p.A.T)
            M_eq = _sym(p.A @ KA)
            try:
                eq_factor = sla.lu_factor(M_eq)
            except (np.linalg.LinAlgError, ValueError):
                status = NUMERICAL_FAILURE
                break
        else:
            KA = eq_factor = None

        def reduced_solve(rhs, eq_rhs):
            if p.A.size:
                rhs = rhs + rho * (p.A.T @ eq_rhs)
            Kr = cho_solve_h(rhs)
            if p.A.size:
                dnu = sla.lu_solve(eq_factor, eq_rhs - p.A @ Kr)
                return Kr + KA @ dnu, dnu
            return Kr, np.zeros(0)

        def recover(dz, Dt_list, rc):
            dS = [Rsj + np.tensordot(dz[blk.index], blk.F, axes=1) for blk, Rsj in zip(p.blocks, Rs)]
            ds = rl + p.G @ dz
            dSt = [Gs.T @ d @ Gs for (Gs, _), d in zip(scal, dS)]
            dXt = [Dt - d for Dt, d in zip(Dt_list, dSt)]
            dX = [_sym(Gs @ d @ Gs.T) for (Gs, _), d in zip(scal, dXt)]
            dx = (rc - st.x * ds) / st.s if st.s.size else np.zeros(0)
            e = rd - p.G.T @ dx
            for blk, d in zip(p.blocks, dX):
                e -= blk.adjoint(d, m)
            return dS, ds, dX, dx, dSt, dXt, e

        def direction(R_list, rc):
            # scaled complementarity  Lam o (dX~ + dS~) = R  solved entrywise
            Dt_list = [R * 2.0 / (lam[:, None] + lam[None, :]) for R, (_, lam) in zip(R_list, scal)]
            rhs = -rd.copy()
            for blk, (Gs, _), Dt, Rsj in zip(p.blocks, scal, Dt_list, Rs):
                W = Gs @ Gs.T
                rhs += blk.adjoint(_sym(Gs @ Dt @ Gs.T - W @ Rsj @ W), m)
            if p.G.size:
                rhs += p.G.T @ ((rc - st.x * rl) / st.s)
            dz, dnu = reduced_solve(rhs, req)
            out = recover(dz, Dt_list, rc)
            # iterative refinement on the explicitly formed dual equation
            tol_e = 1e-16 * (1.0 + np.linalg.norm(rd) + np.linalg.norm(p.c))
            for _ in range(3):
                e = out[-1] - p.A.T @ dnu
                if np.linalg.norm(e) <= tol_e:
                    break
                ddz, ddnu = reduced_solve(-e, req - p.A @ dz)
                dz, dnu = dz + ddz, dnu + ddnu
                out = recover(dz, Dt_list, rc)
            return (dz, dnu) + out[:-1]

        def steps(dSt, ds, dXt, dx):
            ap = min([_max_step_diag(lam, d) for (_, lam), d in zip(scal, dSt)]
                     + [_max_step_vec(st.s, ds)])
            ad = min([_max_step_diag(lam, d) for (_, lam), d in zip(scal, dXt)]
                     + [_max_step_vec(st.x, dx)])
            return ap, ad

        # predictor
        R_aff = [-np.diag(lam ** 2) for _, lam in scal]
        rc_aff = -st.x * st.s
        dz, dnu, dS, ds, dX, dx, dSt, dXt = direction(R_aff, rc_aff)
        if not (np.all(np.isfinite(dz)) and np.all(np.isfinite(dnu))):
            status = NUMERICAL_FAILURE
            break
        ap, ad = steps(dSt, ds, dXt, dx)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (sum(float(np.vdot(np.diag(lam) + ad * a, np.diag(lam) + ap * b))
                      for (_, lam), a, b in zip(scal, dXt, dSt))
                  + float((st.x + ad * dx) @ (st.s + ap * ds))) / nblk_dim
        sigma = float(np.clip((mu_aff / mu) ** 3 if mu > 0 else 0.0, 0.0, 1.0))

        # corrector
        R_cor = [sigma * mu * np.eye(lam.size) - np.diag(lam ** 2) - _sym(a @ b)
                 for (_, lam), a, b in zip(scal, dXt, dSt)]
        rc_cor = sigma * mu - st.x * st.s - dx * ds
        dz, dnu, dS, ds, dX, dx, dSt, dXt = direction(R_cor, rc_cor)
        ap, ad = steps(dSt, ds, dXt, dx)
        gamma = max(settings.step_safeguard, 0.9 + 0.09 * min(min(ap, ad), 1.0))
        gamma = min(gamma, 0.995)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        if not np.isfinite(ap) or not np.isfinite(ad):
            status = NUMERICAL_FAILURE
            break

        st.z = st.z + ap * dz
        st.S = [_sym(S + ap * d) for S, d in zip(st.S, dS)]
        st.s = st.s + ap * ds
        # The dual direction carries a solve error that grows with the Schur
        # condition number; shorten the dual step when it would push the dual
        # residual above both its current value and the tolerance.
        X0, x0, nu0 = st.X, st.x, st.nu

        def trial(a):
            st.X = [_sym(X + a * d) for X, d in zip(X0, dX)]
            st.x = x0 + a * dx
            st.nu = nu0 + a * dnu
            return _measures(p, st, *_residuals(p, st))

        _, dres_new, gap_new, *_ = trial(ad)
        if dres_new > max(dres, 0.5 * settings.feas_tol):
            best_a, best_m = ad, max(dres_new, gap_new)
            for frac in (0.5, 0.25, 0.1, 0.03):
                _, dr, gp, *_ = trial(frac * ad)
                if max(dr, gp) < best_m:
                    best_a, best_m = frac * ad, max(dr, gp)
            ad = best_a
            trial(ad)

        if max(ap, ad) < 1e-9:
            stall += 1
            if stall >= 3:
                status = NUMERICAL_FAILURE
                break
        else:
            stall = 0
    else:
        it = settings.max_iter
        status = MAX_ITERATIONS
        Rs, rl, req, rd = _residuals(p, st)
        pres, dres, gap, *_ = _measures(p, st, Rs, rl, req, rd)
        if pres <= settings.feas_tol and dres <= settings.feas_tol and gap <= settings.gap_tol:
            return pack(OPTIMAL, it)

    if status in (NUMERICAL_FAILURE, MAX_ITERATIONS) and best is not None:
        st = best[1]
    return pack(status, it)


def check_solution(problem: SdpProblem, sol: SdpSolution) -> dict:
    """Recompute feasibility and gap measures from ``z, X, x, nu`` alone."""
    p = problem
    z = np.asarray(sol.z, dtype=float)
    nF0 = np.sqrt(sum(np.sum(blk.F0 ** 2) for blk in p.blocks))
    viol = 0.0
    for blk in p.blocks:
        M = blk.value(z)
        viol = max(viol, -float(np.linalg.eigvalsh(_sym(M))[0]))
    pres = max(viol, 0.0) / (1.0 + nF0)
    if p.G.size:
        pres = max(pres, float(np.max(np.maximum(-(p.G @ z + p.h), 0.0), initial=0.0))
                   / (1.0 + np.linalg.norm(p.h)))
    if p.A.size:
        pres = max(pres, float(np.linalg.norm(p.A @ z - p.b)) / (1.0 + np.linalg.norm(p.b)))
    aty = np.zeros(p.num_vars)
    xviol = 0.0
    for blk, X in zip(p.blocks, sol.X):
        aty += blk.adjoint(X, p.num_vars)
        xviol = max(xviol, -float(np.linalg.eigvalsh(_sym(X))[0]))
    x = sol.x if sol.x is not None else np.zeros(p.G.shape[0])
    nu = sol.nu if sol.nu is not None else np.zeros(p.A.shape[0])
    rd = p.c - aty - p.G.T @ x - p.A.T @ nu
    dres = float(np.linalg.norm(rd)) / (1.0 + np.linalg.norm(p.c))
    pobj = float(p.c @ z) + p.c0
    dobj = (-sum(float(np.vdot(blk.F0, X)) for blk, X in zip(p.blocks, sol.X))
            - float(p.h @ x) + float(p.b @ nu) + p.c0)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return {"primal_residual": pres, "dual_residual": dres, "gap": gap,
            "dual_psd_violation": max(xviol, 0.0), "objective": pobj, "dual_objective": dobj}


# --- SDPA sparse interchange -------------------------------------------------

def write_sdpa(problem: SdpProblem, path) -> None:
    """Write the SDPA sparse (``.dat-s``) form of ``problem``.

    SDPA states ``min c'z s.t. sum_i z_i F_i - F_0 >= 0``; scalar
    inequalities and both sides of each equality go into one trailing
    diagonal (LP) block.  The objective constant is kept in the comment line.
    """
    p = problem
    m = p.num_vars
    lp_rows = [(p.G[i], p.h[i]) for i in range(p.G.shape[0])]
    for i in range(p.A.shape[0]):
        lp_rows.append((p.A[i], -p.b[i]))
        lp_rows.append((-p.A[i], p.b[i]))
    sizes = [blk.side for blk in p.blocks]
    if lp_rows:
        sizes.append(-len(lp_rows))
    lines = [f'"ccmpc SDP c0={p.c0!r}"', str(m), str(len(sizes)),
             " ".join(str(s) for s in sizes),
             " ".join(repr(float(v)) for v in p.c)]
    for bno, blk in enumerate(p.blocks, start=1):
        iu, ju = np.triu_indices(blk.side)
        for i, j in zip(iu, ju):
            v = -blk.F0[i, j]
            if v != 0.0:
                lines.append(f"0 {bno} {i + 1} {j + 1} {float(v)!r}")
        for k, var in enumerate(blk.index):
            Fk = blk.F[k]
            for i, j in zip(iu, ju):
                v = Fk[i, j]
                if v != 0.0:
                    lines.append(f"{var + 1} {bno} {i + 1} {j + 1} {float(v)!r}")
    if lp_rows:
        bno = len(p.blocks) + 1
        for r, (g, h0) in enumerate(lp_rows, start=1):
            if h0 != 0.0:
                lines.append(f"0 {bno} {r} {r} {float(-h0)!r}")
            for var in np.flatnonzero(g):
                lines.append(f"{var + 1} {bno} {r} {r} {float(g[var])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sdpa(path) -> SdpProblem:
    """Read an SDPA sparse file; diagonal (negative-size) blocks become
    scalar inequalities."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh]
    c0 = 0.0
    body = []
    for ln in raw:
        if not ln:
            continue
        if ln[0] in "\"*":
            if "c0=" in ln:
                try:
                    c0 = float(ln.split("c0=")[1].strip('"').split()[0])
                except ValueError:
                    pass
            continue
        body.append(ln.replace(",", " ").replace("{", " ").replace("}", " ")
                    .replace("(", " ").replace(")", " "))
    m = int(body[0].split()[0])
    nb = int(body[1].split()[0])
    sizes = [int(t) for t in body[2].split()][:nb]
    c = np.array([float(t) for t in body[3].split()][:m])
    mats = []
    for s in sizes:
        n = abs(s)
        mats.append((np.zeros((n, n)), np.zeros((m, n, n))))
    for ln in body[4:]:
        t = ln.split()
        k, bno, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        F0, F = mats[bno]
        if k == 0:
            F0[i, j] = F0[j, i] = -v
        else:
            F[k - 1, i, j] = F[k - 1, j, i] = v
    blocks, G_rows, h_rows = [], [], []
    for bno, (s, (F0, F)) in enumerate(zip(sizes, mats)):
        if s > 0:
            blocks.append(AffineBlock.from_dense(f"block{bno + 1}", F0, F))
        else:
            for r in range(-s):
                G_rows.append(F[:, r, r])
                h_rows.append(F0[r, r])
    G = np.array(G_rows).reshape(-1, m)
    h = np.array(h_rows)
    return SdpProblem(m, c, blocks, G, h, c0=c0)
