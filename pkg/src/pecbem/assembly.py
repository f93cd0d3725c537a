"""Dense Galerkin assembly of the EFIE, MFIE, CFIE, Gram matrix, and
plane-wave excitations over RWG functions.

Sign conventions follow the rotated-testing form of the operators, i.e. the
matrices discretize n x T and I/2 + K tested in L2 with RWG functions:

    Z_A[m,n]   = -ik  int int  f_m . f_n  e^{ikR}/(4 pi R) dS dS'
    Z_Phi[m,n] = -1/(ik) int int (div f_m)(div f_n) e^{ikR}/(4 pi R) dS dS'
    Z_E        = Z_A + Z_Phi
    Z_M        = G_ff/2 + K,   K[m,n] = -(f_m, n x (grad G x f_n))
    Z_C        = alpha Z_E + (1 - alpha) eta Z_M

With these relative signs the CFIE combination is free of interior-resonance
breakdown for alpha in (0, 1); flipping the sign of either term of Z_E (or of
Z_E against eta Z_M) reintroduces it.

Singular and adjacent pairs extract the 1/(4 pi R) and R Green kernel terms
and integrate them with the closed forms from `potentials`; the remaining
kernel is analytic in R^2 up to a tame C^1 term and is handled by Gauss rules
on graded outer panels.  Far pairs use symmetric triangle rules with a
distance-based order bump.  Assembly order is fixed and serial, so equal
inputs produce bit-identical matrices.
"""

from dataclasses import dataclass, replace

import numpy as np

from .basis import RwgBasis, SparseTransform
from .constants import FREE_SPACE_IMPEDANCE_OHM
from .errors import MeshError
from .kernels import far_pair_sums, gram_sums
from .potentials import static_triangle_integrals
from .quadrature import (edge_graded_panels, physical_nodes, self_graded_panels,
                         triangle_rule, vertex_graded_panels)

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class AssemblyOptions:
    """Quadrature configuration; defaults target ~1e-8 far-pair accuracy."""

    far_degree: int = 6
    close_degree: int = 10      # disjoint but close pairs
    close_ratio: float = 2.5    # centroid distance / max diameter threshold
    inner_degree: int = 8       # smooth remainder on the source triangle
    edge_depth: int = 12
    edge_nt: int = 7
    edge_ns: int = 6
    edge_s_depth: int = 6
    self_depth: int = 10
    self_nt: int = 6
    self_ns: int = 5
    self_s_depth: int = 6
    vertex_depth: int = 12
    vertex_nu: int = 6
    vertex_ns: int = 8
    graded_ratio: float = 0.25
    rhs_degree: int = 8

    def doubled(self) -> "AssemblyOptions":
        """Roughly doubled quadrature effort everywhere (convergence checks)."""
        return replace(
            self,
            far_degree=12, close_degree=14, inner_degree=14,
            edge_depth=self.edge_depth + 2, edge_nt=self.edge_nt + 2,
            edge_ns=self.edge_ns + 2, edge_s_depth=self.edge_s_depth + 2,
            self_depth=self.self_depth + 2, self_nt=self.self_nt + 2,
            self_ns=self.self_ns + 2, self_s_depth=self.self_s_depth + 2,
            vertex_depth=self.vertex_depth + 2, vertex_nu=self.vertex_nu + 2,
            vertex_ns=self.vertex_ns + 2,
            rhs_degree=self.rhs_degree + 4,
        )


@dataclass(frozen=True)
class SystemMatrix:
    """Dense system matrix with formulation metadata."""

    values: np.ndarray
    kind: str                 # Z_A | Z_Phi | Z_E | Z_M | Z_C | G_ff
    k: float
    fingerprint: str
    alpha: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise MeshError(f"non-finite entries in {self.kind}")

    @property
    def shape(self):
        return self.values.shape


def _geometry_tables(basis: RwgBasis):
    mesh = basis.mesh
    topo = basis.topology
    tris = mesh.triangles
    verts3 = mesh.corners()
    areas = mesh.areas()
    normals = mesh.normals()
    centroids = mesh.centroids()
    diams = np.max(
        np.stack([np.linalg.norm(verts3[:, i] - verts3[:, j], axis=1)
                  for i, j in ((0, 1), (1, 2), (2, 0))]), axis=0)
    return tris, verts3, areas, normals, centroids, diams, topo.tri_edges, topo.tri_edge_sign


def _rule_nodes(mesh, degree):
    bary, w = triangle_rule(degree)
    corners = mesh.corners()
    pts = np.einsum("qb,fbc->fqc", bary, corners)
    wts = w[None, :] * mesh.areas()[:, None]
    return np.ascontiguousarray(pts), np.ascontiguousarray(wts)


def _smooth_g(R: np.ndarray, k: float) -> np.ndarray:
    """G - 1/(4 pi R) + k^2 R/(8 pi), stable for small kR (limit ik/4pi)."""
    z = 1j * k * R
    az = np.abs(z)
    small = az < 0.25
    out = np.empty(R.shape, dtype=np.complex128)
    zs = z[small]
    acc = np.ones_like(zs)
    term = np.ones_like(zs)
    # 1 + sum_{m>=2} z^m/(m+1)!
    fact = 1.0
    zp = np.ones_like(zs)
    for m in range(2, 10):
        zp = zs ** m
        fact = 1.0
        for j in range(2, m + 2):
            fact *= j
        acc = acc + zp / fact
    out[small] = (1j * k / FOUR_PI) * acc
    zl = z[~small]
    Rl = R[~small]
    out[~small] = (np.exp(zl) - 1.0 - 0.5 * zl * zl) / (FOUR_PI * Rl)
    return out


def _smooth_grad_factor(R: np.ndarray, k: float) -> np.ndarray:
    """(e^{ikR}(ikR - 1) + 1)/(4 pi R^3): the gradient kernel minus its
    static part; the product with (r - r') stays bounded as R -> 0."""
    z = 1j * k * R
    az = np.abs(z)
    small = az < 0.25
    out = np.empty(R.shape, dtype=np.complex128)
    zs = z[small]
    # sum_{n>=2} (n-1) z^n / n!
    acc = np.zeros_like(zs)
    for n in range(2, 12):
        fact = 1.0
        for j in range(2, n + 1):
            fact *= j
        acc = acc + (n - 1) * zs ** n / fact
    Rs = R[small]
    safe = np.where(Rs > 0.0, Rs, 1.0)
    out[small] = np.where(Rs > 0.0, acc / (FOUR_PI * safe ** 3), 0.0)
    zl = z[~small]
    Rl = R[~small]
    out[~small] = (np.exp(zl) * (zl - 1.0) + 1.0) / (FOUR_PI * Rl ** 3)
    return out


def _near_pairs(basis: RwgBasis):
    """Unordered triangle pairs sharing at least one vertex, with the shared ids."""
    topo = basis.topology
    tris = basis.mesh.triangles
    pairs = {}
    for f in range(len(tris)):
        pairs[(f, f)] = tuple(int(v) for v in tris[f])
    for incident in topo.vertex_triangles:
        for i, p in enumerate(incident):
            for q in incident[i + 1:]:
                key = (p, q) if p < q else (q, p)
                if key not in pairs:
                    shared = set(map(int, tris[key[0]])) & set(map(int, tris[key[1]]))
                    pairs[key] = tuple(sorted(shared))
    return pairs


def _outer_panels(tri, tri_ids, shared, opts: AssemblyOptions):
    """Graded outer quadrature on a test triangle toward the shared feature."""
    local = [i for i, v in enumerate(tri_ids) if v in shared]
    if len(shared) == 3:
        return self_graded_panels(tri, depth=opts.self_depth, ratio=opts.graded_ratio,
                                  n_t=opts.self_nt, n_s=opts.self_ns,
                                  s_depth=opts.self_s_depth)
    if len(local) == 2:
        return edge_graded_panels(tri, (local[0], local[1]), depth=opts.edge_depth,
                                  ratio=opts.graded_ratio, n_t=opts.edge_nt,
                                  n_s=opts.edge_ns, s_depth=opts.edge_s_depth)
    return vertex_graded_panels(tri, local[0], depth=opts.vertex_depth,
                                ratio=opts.graded_ratio, n_u=opts.vertex_nu,
                                n_s=opts.vertex_ns)


def _efie_near_local(triP, triQ, outer_pts, outer_w, k, opts: AssemblyOptions):
    """(3x3 int int (r-va).(r'-vb) G, scalar int int G) for one ordered pair."""
    si = static_triangle_integrals(triQ, outer_pts)
    c_static = 1.0 / FOUR_PI
    c_lin = -(k * k) / (2.0 * FOUR_PI)

    bary, bw = triangle_rule(opts.inner_degree)
    yq = physical_nodes(triQ, bary)
    areaQ = 0.5 * np.linalg.norm(np.cross(triQ[1] - triQ[0], triQ[2] - triQ[0]))
    wq = bw * areaQ

    diff = outer_pts[:, None, :] - yq[None, :, :]
    R = np.linalg.norm(diff, axis=2)
    Gs = _smooth_g(R, k)
    GsW = Gs * wq[None, :]

    s_col = c_static * si.K_m1 + c_lin * si.K_p1 + GsW.sum(axis=1)
    m1 = complex(np.dot(outer_w, s_col))

    aloc = np.empty((3, 3), dtype=np.complex128)
    for b in range(3):
        vb = triQ[b]
        v_static = c_static * si.moment_1_over_r(vb) + c_lin * si.moment_r(vb)
        v_smooth = GsW @ (yq - vb)
        vcol = v_static + v_smooth
        for a in range(3):
            ua = outer_pts - triP[a]
            aloc[a, b] = np.dot(outer_w, np.einsum("nc,nc->n", ua, vcol))
    return aloc, m1


def _k_near_local(triP, triQ, nP, outer_pts, outer_w, k, opts: AssemblyOptions):
    """3x3 int int (r-va).[nP x (grad_r G x (r'-vb))] for one ordered pair.

    Coplanar pairs vanish identically (both nP.f' and nP.grad G are zero)."""
    nQ_raw = np.cross(triQ[1] - triQ[0], triQ[2] - triQ[0])
    nQ = nQ_raw / np.linalg.norm(nQ_raw)
    offs = np.abs((triP - triQ[0]) @ nQ)
    span = max(np.max(np.abs(triP - triQ[0])), 1.0)
    if np.max(offs) < 1e-13 * span:
        return np.zeros((3, 3), dtype=np.complex128)

    si = static_triangle_integrals(triQ, outer_pts, with_gradient=True)
    w0 = si.w0
    w0K3 = np.sign(w0) * si.beta
    ivm3 = si.grad_vec + w0K3[:, None] * nQ
    T2nP = np.einsum("ncd,d->nc", si.grad_tensor, nP)
    nIvm3 = ivm3 @ nP
    nPQ = float(nP @ nQ)

    bary, bw = triangle_rule(opts.inner_degree)
    yq = physical_nodes(triQ, bary)
    areaQ = 0.5 * np.linalg.norm(nQ_raw)
    wq = bw * areaQ
    diff = outer_pts[:, None, :] - yq[None, :, :]
    R = np.linalg.norm(diff, axis=2)
    gsW = _smooth_grad_factor(R, k) * wq[None, :]
    nPd = np.einsum("nhc,c->nh", diff, nP)

    kloc = np.empty((3, 3), dtype=np.complex128)
    for b in range(3):
        vb = triQ[b]
        c1 = (si.rho - vb) @ nP
        s1b = (T2nP + c1[:, None] * ivm3
               - nQ[None, :] * (w0 * nIvm3 + c1 * w0K3)[:, None])
        yb = yq - vb
        nyb = yb @ nP
        for a in range(3):
            ua = outer_pts - triP[a]
            ua_ivm3 = np.einsum("nc,nc->n", ua, ivm3)
            ua_T2nP = np.einsum("nc,nc->n", ua, T2nP)
            c2 = np.einsum("nc,nc->n", ua, si.rho - vb)
            # term1 = int (ua.(y-u)) (nP.(y-vb)) / R^3
            term1 = np.einsum("nc,nc->n", ua, s1b)
            # term2 = int (ua.(y-vb)) (nP.(y-u)) / R^3
            term2 = (ua_T2nP + c2 * nIvm3) - nPQ * (w0 * ua_ivm3 + c2 * w0K3)
            ua_d = np.einsum("nc,nhc->nh", ua, diff)
            ua_yb = np.einsum("nc,hc->nh", ua, yb)
            smooth = (gsW * (ua_d * nyb[None, :] - ua_yb * nPd)).sum(axis=1)
            # grad_u G0 = (y-u)/(4 pi R^3):
            #   (ua.grad G0)(nP.(y-vb)) -> term1/4pi
            #   (ua.(y-vb))(nP.grad G0) -> term2/4pi
            kloc[a, b] = np.dot(outer_w, (term1 - term2) / FOUR_PI + smooth)
    return kloc


def _scatter_local(target, tri_edges, tri_signs, areas, P, Q, loc, mode):
    ap, aq = areas[P], areas[Q]
    for a in range(3):
        m = tri_edges[P, a]
        sa = tri_signs[P, a]
        for b in range(3):
            n = tri_edges[Q, b]
            sb = tri_signs[Q, b]
            if mode == "vec":
                target[m, n] += sa * sb / (4.0 * ap * aq) * loc[a, b]
            elif mode == "div":
                target[m, n] += (sa / ap) * (sb / aq) * loc
            else:  # magnetic: includes the leading minus of K
                target[m, n] -= sa * sb / (4.0 * ap * aq) * loc[a, b]


def raw_kernel_sums(basis: RwgBasis, k: float, options: AssemblyOptions = AssemblyOptions(),
                    want_k_op: bool = True):
    """Raw double integrals (M, S, K_raw) before frequency prefactors.

    M[m,n] = (f_m, G * f_n), S[m,n] = (div f_m, G div f_n),
    K_raw[m,n] = -(f_m, n x (grad G x f_n)).
    """
    if k <= 0.0:
        raise MeshError(f"wavenumber must be positive, got {k}")
    tris, verts3, areas, normals, centroids, diams, tri_edges, tri_signs = \
        _geometry_tables(basis)
    mesh = basis.mesh
    N = basis.size

    pts_b, w_b = _rule_nodes(mesh, options.far_degree)
    pts_f, w_f = _rule_nodes(mesh, options.close_degree)
    M, S, Kr = far_pair_sums(tris, verts3, areas, normals, centroids, diams,
                             pts_b, w_b, pts_f, w_f, options.close_ratio,
                             k, tri_edges, tri_signs, N, want_k_op)

    corners = mesh.corners()
    for (P, Q), shared in sorted(_near_pairs(basis).items()):
        triP, triQ = corners[P], corners[Q]
        idsP = tuple(int(v) for v in tris[P])
        idsQ = tuple(int(v) for v in tris[Q])
        panelsP = _outer_panels(triP, idsP, shared, options)
        aloc, m1 = _efie_near_local(triP, triQ, panelsP[0], panelsP[1], k, options)
        _scatter_local(M, tri_edges, tri_signs, areas, P, Q, aloc, "vec")
        _scatter_local(S, tri_edges, tri_signs, areas, P, Q, m1, "div")
        if P != Q:
            _scatter_local(M, tri_edges, tri_signs, areas, Q, P, aloc.T, "vec")
            _scatter_local(S, tri_edges, tri_signs, areas, Q, P, m1, "div")
        if want_k_op:
            kpq = _k_near_local(triP, triQ, normals[P], panelsP[0], panelsP[1], k, options)
            _scatter_local(Kr, tri_edges, tri_signs, areas, P, Q, kpq, "mag")
            if P != Q:
                panelsQ = _outer_panels(triQ, idsQ, shared, options)
                kqp = _k_near_local(triQ, triP, normals[Q], panelsQ[0], panelsQ[1], k, options)
                _scatter_local(Kr, tri_edges, tri_signs, areas, Q, P, kqp, "mag")
    return M, S, Kr


def assemble_efie(basis: RwgBasis, k: float,
                  options: AssemblyOptions = AssemblyOptions()):
    """Vector- and scalar-potential Galerkin matrices (Z_A, Z_Phi)."""
    M, S, _ = raw_kernel_sums(basis, k, options, want_k_op=False)
    fp = basis.mesh.fingerprint()
    za = SystemMatrix(values=(-1j * k) * M, kind="Z_A", k=k, fingerprint=fp)
    zphi = SystemMatrix(values=(-1.0 / (1j * k)) * S, kind="Z_Phi", k=k, fingerprint=fp)
    return za, zphi


def assemble_mfie(basis: RwgBasis, k: float,
                  options: AssemblyOptions = AssemblyOptions(),
                  gram: "SystemMatrix | None" = None) -> SystemMatrix:
    """MFIE matrix Z_M = G_ff/2 + K (RWG tested, principal-value K)."""
    _, _, Kr = raw_kernel_sums(basis, k, options, want_k_op=True)
    g = gram if gram is not None else assemble_gram(basis)
    vals = 0.5 * g.values.astype(np.complex128) + Kr
    return SystemMatrix(values=vals, kind="Z_M", k=k, fingerprint=basis.mesh.fingerprint())


def assemble_efie_mfie(basis: RwgBasis, k: float,
                       options: AssemblyOptions = AssemblyOptions(),
                       gram: "SystemMatrix | None" = None):
    """One-pass assembly of (Z_A, Z_Phi, Z_M); shares the kernel sweep."""
    M, S, Kr = raw_kernel_sums(basis, k, options, want_k_op=True)
    fp = basis.mesh.fingerprint()
    za = SystemMatrix(values=(-1j * k) * M, kind="Z_A", k=k, fingerprint=fp)
    zphi = SystemMatrix(values=(-1.0 / (1j * k)) * S, kind="Z_Phi", k=k, fingerprint=fp)
    g = gram if gram is not None else assemble_gram(basis)
    zm = SystemMatrix(values=0.5 * g.values.astype(np.complex128) + Kr,
                      kind="Z_M", k=k, fingerprint=fp)
    return za, zphi, zm


def assemble_gram(basis: RwgBasis) -> SystemMatrix:
    """RWG Gram matrix (f_m, f_n); the 7-point rule is exact for the
    quadratic integrand."""
    tris, verts3, areas, _, _, _, tri_edges, tri_signs = _geometry_tables(basis)
    pts, w = _rule_nodes(basis.mesh, 5)
    G = gram_sums(tris, verts3, areas, pts, w, tri_edges, tri_signs, basis.size)
    return SystemMatrix(values=G, kind="G_ff", k=0.0,
                        fingerprint=basis.mesh.fingerprint())


def efie_matrix(za: SystemMatrix, zphi: SystemMatrix) -> SystemMatrix:
    if za.fingerprint != zphi.fingerprint or za.k != zphi.k:
        raise MeshError("Z_A and Z_Phi come from different assemblies")
    return SystemMatrix(values=za.values + zphi.values, kind="Z_E", k=za.k,
                        fingerprint=za.fingerprint)


def combine_cfie(ze: SystemMatrix, zm: SystemMatrix, alpha: float,
                 eta: float = FREE_SPACE_IMPEDANCE_OHM,
                 allow_endpoints: bool = False) -> SystemMatrix:
    """Z_C = alpha Z_E + (1 - alpha) eta Z_M with alpha in (0, 1).

    The endpoints produce a pure EFIE/MFIE system and are only permitted
    behind the explicit flag."""
    if ze.shape != zm.shape or ze.k != zm.k or ze.fingerprint != zm.fingerprint:
        raise MeshError("Z_E and Z_M are not compatible")
    if not allow_endpoints and not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if allow_endpoints and not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    vals = alpha * ze.values + (1.0 - alpha) * eta * zm.values
    return SystemMatrix(values=vals, kind="Z_C", k=ze.k,
                        fingerprint=ze.fingerprint, alpha=alpha)


@dataclass(frozen=True)
class PlaneWave:
    """Linearly polarized plane wave E^i = amplitude * pol * e^{ik dir.r}."""

    direction: np.ndarray
    polarization: np.ndarray
    amplitude: float
    k: float
    eta: float = FREE_SPACE_IMPEDANCE_OHM

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.float64)
        p = np.asarray(self.polarization, dtype=np.float64)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            d = d / np.linalg.norm(d)
        if abs(np.linalg.norm(p) - 1.0) > 1e-12:
            p = p / np.linalg.norm(p)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "polarization", p)
        if abs(float(d @ p)) > 1e-10:
            raise ValueError("polarization must be orthogonal to the direction")
        if self.k <= 0:
            raise ValueError(f"wavenumber must be positive, got {self.k}")

    def e_field(self, points: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * self.k * (points @ self.direction))
        return self.amplitude * phase[:, None] * self.polarization[None, :]

    def h_field(self, points: np.ndarray) -> np.ndarray:
        return np.cross(self.direction, self.e_field(points)) / self.eta


def plane_wave_rhs(basis: RwgBasis, wave: PlaneWave, alpha_c: float,
                   options: AssemblyOptions = AssemblyOptions(),
                   allow_endpoints: bool = False) -> np.ndarray:
    """v_C = alpha v_E + (1 - alpha) eta v_M.

    v_E[m] = (f_m, E^i) (equal to -(f_m, n x n x E^i) for tangential f_m) and
    v_M[m] = (f_m, n x H^i)."""
    if not allow_endpoints and not 0.0 < alpha_c < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha_c}")
    mesh = basis.mesh
    topo = basis.topology
    normals = mesh.normals()
    corners = mesh.corners()
    areas = mesh.areas()
    bary, bw = triangle_rule(options.rhs_degree)
    pts = np.einsum("qb,fbc->fqc", bary, corners)
    F = mesh.num_triangles
    flat = pts.reshape(-1, 3)
    e_i = wave.e_field(flat).reshape(F, -1, 3)
    h_i = wave.h_field(flat).reshape(F, -1, 3)
    n_x_h = np.cross(np.broadcast_to(normals[:, None, :], h_i.shape), h_i)

    v = np.zeros(basis.size, dtype=np.complex128)
    w_phys = bw[None, :] * areas[:, None]
    for P in range(F):
        for a in range(3):
            m = topo.tri_edges[P, a]
            sa = topo.tri_edge_sign[P, a]
            fa = (pts[P] - corners[P, a]) * (sa / (2.0 * areas[P]))
            ve = np.einsum("q,qc,qc->", w_phys[P], fa, e_i[P])
            vm = np.einsum("q,qc,qc->", w_phys[P], fa, n_x_h[P])
            v[m] += alpha_c * ve + (1.0 - alpha_c) * wave.eta * vm
    return v


@dataclass(frozen=True)
class StaticBlocks:
    """Quasi-Helmholtz blocks of T^T Z_E T with T = [Lambda/sqrt(k), Sigma sqrt(k)].

    The loop rows/columns of Z_Phi vanish identically (solenoidality), so the
    loop-loop and off-diagonal blocks are computed from Z_A alone; this keeps
    them meaningful at wavenumbers where ||Z_Phi|| ~ 1/k would otherwise
    drown them in roundoff."""

    Z_LL: np.ndarray
    Z_LS: np.ndarray
    Z_SL: np.ndarray
    Z_SS: np.ndarray
    k: float

    def offdiag_ratio(self) -> float:
        off = np.sqrt(np.linalg.norm(self.Z_LS, "fro") ** 2
                      + np.linalg.norm(self.Z_SL, "fro") ** 2)
        total = np.sqrt(np.linalg.norm(self.Z_LL, "fro") ** 2
                        + np.linalg.norm(self.Z_SS, "fro") ** 2 + off ** 2)
        return float(off / total)

    def block_norms(self) -> dict:
        return {
            "LL": float(np.linalg.norm(self.Z_LL, "fro")),
            "LS": float(np.linalg.norm(self.Z_LS, "fro")),
            "SL": float(np.linalg.norm(self.Z_SL, "fro")),
            "SS": float(np.linalg.norm(self.Z_SS, "fro")),
        }


def static_limit_blocks(basis: RwgBasis, loop_t: SparseTransform,
                        star_t: SparseTransform, k_small: float,
                        options: AssemblyOptions = AssemblyOptions()) -> StaticBlocks:
    """Assemble Z_E at k_small and return the frequency-scaled qH blocks."""
    za, zphi = assemble_efie(basis, k_small, options)
    L = loop_t.matrix
    S = star_t.matrix
    ZaL = za.values @ L.toarray()
    ZaS = za.values @ S.toarray()
    ZpS = zphi.values @ S.toarray()
    Ld = L.toarray()
    Sd = S.toarray()
    return StaticBlocks(
        Z_LL=(Ld.T @ ZaL) / k_small,
        Z_LS=Ld.T @ ZaS,
        Z_SL=Sd.T @ ZaL,
        Z_SS=k_small * (Sd.T @ (ZaS + ZpS)),
        k=k_small,
    )
