"""Dense-friendly Krylov solvers with per-iteration residual reporting.

GMRES is non-restarted by default (desk-scale systems) so iteration counts
are directly comparable across preconditioners; CG supports deflation of a
known null space, which is how the graph-Laplacian solves inside the
solenoidal projector stay well-posed.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError


@dataclass
class SolveReport:
    """Outcome of an iterative solve."""

    solution: np.ndarray
    iterations: int
    residuals: list = field(default_factory=list)
    converged: bool = False
    wall_time_s: float = 0.0

    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else np.inf


def gmres(apply_a: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
          tol: float = 1e-6, restart: Optional[int] = None,
          max_iter: int = 2000,
          left_precond: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> SolveReport:
    """GMRES with modified Gram-Schmidt and Givens rotations.

    With `left_precond` M the iteration runs on M A x = M b and the recorded
    residuals are the preconditioned ones ||M(b - A x)|| / ||M b||.  Without
    restart the Arnoldi basis grows to the iteration count (full GMRES).
    """
    b = np.asarray(b)
    n = b.shape[0]
    if not np.any(b):
        raise ValueError("right-hand side is zero")
    dtype = np.result_type(b.dtype, np.complex128)

    def m_apply(v):
        return left_precond(v) if left_precond is not None else v

    t_start = time.perf_counter()
    x = np.zeros(n, dtype=dtype)
    mb = m_apply(b.astype(dtype))
    norm_mb = np.linalg.norm(mb)
    residuals = []
    total_iter = 0
    converged = False

    cycle = max_iter if restart is None else min(restart, max_iter)

    while total_iter < max_iter and not converged:
        r = m_apply(b - apply_a(x)) if total_iter else mb.copy()
        beta = np.linalg.norm(r)
        if beta / norm_mb <= tol:
            converged = True
            if not residuals:
                residuals.append(float(beta / norm_mb))
            break
        m = min(cycle, max_iter - total_iter)
        V = np.zeros((n, m + 1), dtype=dtype)
        H = np.zeros((m + 1, m), dtype=dtype)
        cs = np.zeros(m, dtype=dtype)
        sn = np.zeros(m, dtype=dtype)
        g = np.zeros(m + 1, dtype=dtype)
        V[:, 0] = r / beta
        g[0] = beta
        j_done = 0
        for j in range(m):
            w = m_apply(apply_a(V[:, j]))
            for i in range(j + 1):
                H[i, j] = np.vdot(V[:, i], w)
                w -= H[i, j] * V[:, i]
            H[j + 1, j] = np.linalg.norm(w)
            if H[j + 1, j].real > 1e-300:
                V[:, j + 1] = w / H[j + 1, j]
            # apply accumulated rotations, then a new one zeroing H[j+1, j]
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            a, bb = H[j, j], H[j + 1, j]
            if bb == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            elif a == 0.0:
                cs[j], sn[j] = 0.0, 1.0
            else:
                t = np.sqrt(np.abs(a) ** 2 + np.abs(bb) ** 2)
                cs[j] = np.abs(a) / t
                sn[j] = (a / np.abs(a)) * np.conj(bb) / t
            H[j, j] = cs[j] * a + sn[j] * bb
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            total_iter += 1
            j_done = j + 1
            rel = np.abs(g[j + 1]) / norm_mb
            residuals.append(float(rel))
            if rel <= tol:
                converged = True
                break
        y = np.linalg.solve(H[:j_done, :j_done], g[:j_done])
        x = x + V[:, :j_done] @ y
        if restart is None:
            break

    wall = time.perf_counter() - t_start
    return SolveReport(solution=x, iterations=total_iter, residuals=residuals,
                       converged=converged, wall_time_s=wall)


def cg(apply_spd: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
       tol: float = 1e-12, max_iter: int = 10000,
       deflation_space: Optional[np.ndarray] = None) -> SolveReport:
    """Conjugate gradients for Hermitian PSD operators with optional deflation.

    `deflation_space` columns span the (known) null space; the right-hand side
    and all iterates are kept orthogonal to it, and the returned solution is
    the minimum-norm one (orthogonal to the deflation space).  Detected
    negative curvature raises ConvergenceError (operator not PSD).
    """
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, np.float64)
    t_start = time.perf_counter()

    U = None
    if deflation_space is not None:
        U = np.linalg.qr(np.atleast_2d(np.asarray(deflation_space, dtype=dtype)).reshape(
            b.shape[0], -1))[0]

    def project(v):
        if U is None:
            return v
        return v - U @ (U.conj().T @ v)

    b_p = project(b.astype(dtype))
    norm_b = np.linalg.norm(b_p)
    if norm_b == 0.0:
        return SolveReport(solution=np.zeros_like(b_p), iterations=0,
                           residuals=[0.0], converged=True,
                           wall_time_s=time.perf_counter() - t_start)

    x = np.zeros_like(b_p)
    r = b_p.copy()
    p = r.copy()
    rs = np.vdot(r, r).real
    residuals = [1.0]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Ap = project(apply_spd(p))
        pAp = np.vdot(p, Ap).real
        if pAp <= 0.0:
            raise ConvergenceError(
                f"negative curvature at iteration {it}: operator is not PSD",
                residual=np.sqrt(rs) / norm_b, iterations=it)
        alpha = rs / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = np.vdot(r, r).real
        rel = np.sqrt(rs_new) / norm_b
        residuals.append(float(rel))
        if rel <= tol:
            converged = True
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    x = project(x)
    return SolveReport(solution=x, iterations=it, residuals=residuals,
                       converged=converged, wall_time_s=time.perf_counter() - t_start)
