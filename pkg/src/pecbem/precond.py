"""Quasi-Helmholtz projector and the aligned left preconditioner.

The solenoidal projector P = Lambda (Lambda^T Lambda)^+ Lambda^T is applied
matrix-free: the graph-Laplacian solve uses deflated CG at a fixed inner
tolerance, so the projector acts as one fixed linear operator across all
outer Krylov iterations.  The left preconditioner

    M = P/alpha + S D^2 S^T / beta

aligns the two singular-value branches by the spectral norms alpha, beta of
the corresponding operator compositions, estimated with power iteration.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .basis import DiagonalScaling, SparseTransform, graph_laplacian
from .errors import ConvergenceError, SingularBasisError
from .solvers import cg


@dataclass(frozen=True)
class ProjectorContext:
    """State needed to apply P = Lambda (Lambda^T Lambda)^+ Lambda^T.

    Built from the undropped loop transform; the per-component constant
    vectors span the Laplacian null space and are deflated in the inner CG."""

    loops: SparseTransform
    laplacian: sp.csr_matrix
    deflation: np.ndarray
    inner_tol: float = 1e-12
    inner_max_iter: int = 20000

    @property
    def size(self) -> int:
        return self.loops.shape[0]


def build_projector(loops_full: SparseTransform, vertex_components: np.ndarray,
                    inner_tol: float = 1e-12) -> ProjectorContext:
    """Assemble the projector context from the undropped loop transform."""
    lap = graph_laplacian(loops_full)
    n_comp = int(vertex_components.max()) + 1 if len(vertex_components) else 0
    vecs = np.zeros((lap.shape[0], n_comp))
    for c in range(n_comp):
        mask = vertex_components == c
        vecs[mask, c] = 1.0 / np.sqrt(mask.sum())
    return ProjectorContext(loops=loops_full, laplacian=lap, deflation=vecs,
                            inner_tol=inner_tol)


def solenoidal_projector_apply(ctx: ProjectorContext, x: np.ndarray) -> np.ndarray:
    """P x = Lambda y with (Lambda^T Lambda) y = Lambda^T x, solved by
    deflated CG; the solution is pinned to zero mean per component."""
    rhs = ctx.loops.matrix.T @ x
    lap = ctx.laplacian

    report = cg(lambda v: lap @ v, rhs, tol=ctx.inner_tol,
                max_iter=ctx.inner_max_iter, deflation_space=ctx.deflation)
    if not report.converged:
        raise ConvergenceError(
            "projector inner CG did not reach the requested tolerance",
            residual=report.final_residual(), iterations=report.iterations)
    return ctx.loops.matrix @ report.solution


def jacobi_rescale(transform: SparseTransform, z: np.ndarray) -> DiagonalScaling:
    """[D]_ii = 1/sqrt(|(S^T Z S)_ii|), touching only the diagonal entries.

    Raises SingularBasisError naming the column if a diagonal entry vanishes."""
    z = np.asarray(z)
    s = transform.matrix
    zs = z @ s.toarray() if sp.issparse(s) else z @ s
    diag = np.einsum("ij,ij->j", np.asarray(s.todense()), zs)
    mags = np.abs(diag)
    if np.any(mags == 0.0) or not np.all(np.isfinite(mags)):
        j = int(np.argmin(np.where(np.isfinite(mags), mags, np.inf)))
        raise SingularBasisError(f"zero diagonal in Jacobi rescaling at column {j}")
    return DiagonalScaling(values=1.0 / np.sqrt(mags), provenance="jacobi")


def estimate_spectral_norm(apply_op: Callable[[np.ndarray], np.ndarray], n: int,
                           tol: float = 1e-3, seed: int = 0,
                           apply_adjoint: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                           max_iter: int = 500):
    """Largest singular value by power iteration on (adjoint o apply).

    Returns (estimate, converged_flag); on hitting the iteration cap the best
    estimate is returned with the flag cleared."""
    if n < 1:
        raise ValueError("operator dimension must be >= 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    if apply_adjoint is None:
        raise ValueError("apply_adjoint is required for a general operator")
    est_prev = 0.0
    for _ in range(max_iter):
        w = apply_op(v)
        est = np.linalg.norm(w)
        z = apply_adjoint(w)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0, True
        v = z / nz
        if abs(est - est_prev) <= tol * max(est, 1e-300):
            return float(est), True
        est_prev = est
    return float(est_prev), False


def spectral_norm_dense(a: np.ndarray, tol: float = 1e-3, seed: int = 0):
    return estimate_spectral_norm(lambda v: a @ v, a.shape[1], tol=tol, seed=seed,
                                  apply_adjoint=lambda v: a.conj().T @ v)


@dataclass(frozen=True)
class LeftPreconditioner:
    """M = P/alpha + S D^2 S^T / beta (symmetric positive semidefinite)."""

    projector: ProjectorContext
    nonsol: SparseTransform
    d_phi: DiagonalScaling
    alpha_norm: float
    beta_norm: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        p_part = solenoidal_projector_apply(self.projector, x)
        s = self.nonsol.matrix
        d2 = self.d_phi.values ** 2
        s_part = s @ (d2 * (s.T @ x))
        return p_part / self.alpha_norm + s_part / self.beta_norm

    def dense(self) -> np.ndarray:
        """Materialized M (desk-scale diagnostics and condition numbers)."""
        n = self.projector.size
        lap = self.projector.laplacian.toarray()
        pinv = np.linalg.pinv(lap, rcond=1e-10)
        lam = self.projector.loops.matrix.toarray()
        p = lam @ pinv @ lam.T
        s = self.nonsol.matrix.toarray()
        d2 = self.d_phi.values ** 2
        return p / self.alpha_norm + (s * d2) @ s.T / self.beta_norm


def build_left_preconditioner(loops_full: SparseTransform, vertex_components: np.ndarray,
                              nonsol: SparseTransform, d_phi: DiagonalScaling,
                              z: np.ndarray, power_tol: float = 1e-3,
                              seed: int = 0, inner_tol: float = 1e-12) -> LeftPreconditioner:
    """Estimate the branch norms alpha = ||P Z||_2, beta = ||S D^2 S^T Z||_2
    (power iteration, matrix-free projector) and assemble M."""
    ctx = build_projector(loops_full, vertex_components, inner_tol=inner_tol)
    z = np.asarray(z)
    n = z.shape[0]
    s = nonsol.matrix
    d2 = d_phi.values ** 2

    def p_z(v):
        return solenoidal_projector_apply(ctx, z @ v)

    def p_z_adj(v):
        return z.conj().T @ solenoidal_projector_apply(ctx, v)

    def s_z(v):
        return s @ (d2 * (s.T @ (z @ v)))

    def s_z_adj(v):
        return z.conj().T @ (s @ (d2 * (s.T @ v)))

    alpha, ok_a = estimate_spectral_norm(p_z, n, tol=power_tol, seed=seed,
                                         apply_adjoint=p_z_adj)
    beta, ok_b = estimate_spectral_norm(s_z, n, tol=power_tol, seed=seed + 1,
                                        apply_adjoint=s_z_adj)
    if alpha <= 0.0 or beta <= 0.0:
        raise ConvergenceError("spectral norm estimation returned a nonpositive value")
    return LeftPreconditioner(projector=ctx, nonsol=nonsol, d_phi=d_phi,
                              alpha_norm=alpha, beta_norm=beta)


def split_preconditioned_system(h: SparseTransform, z: np.ndarray, v: np.ndarray):
    """Congruence-transformed system (H^T Z H, H^T v); recover RWG
    coefficients from a solution y as H y."""
    z = np.asarray(z)
    hm = h.matrix
    zh = z @ hm.toarray()
    return hm.T.toarray() @ zh, hm.T @ v
