"""Independent quadrature oracles for verifying the production assembly.

Everything here is numeric: collapsed Gauss-Legendre tensor rules, Duffy
transforms concentrated at the closest point, and composite geometric panels.
No Wilton-style closed forms, no symmetric triangle tables, and no kernel
extraction, so agreement with the production path checks the analytic
integrals, the extraction algebra, and the production panel scheme at once.

Near integrals are evaluated twice at different resolutions; the oracle
raises if its own two estimates disagree, so a reported value is trustworthy
to roughly the requested tolerance.
"""

import numpy as np

FOUR_PI = 4.0 * np.pi


class OracleError(RuntimeError):
    pass


def _gl01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def tri_area(tri):
    return 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))


def collapsed_nodes(tri, n):
    """Tensor GL rule collapsed onto a triangle; absolute weights."""
    u, wu = _gl01(n)
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    xi = U.ravel()
    eta = (V * (1.0 - U)).ravel()
    w = (WU * WV * (1.0 - U)).ravel() * 2.0 * tri_area(tri)
    pts = (1.0 - xi - eta)[:, None] * tri[0] + xi[:, None] * tri[1] + eta[:, None] * tri[2]
    return pts, w


def _children(tri):
    m01 = 0.5 * (tri[0] + tri[1])
    m12 = 0.5 * (tri[1] + tri[2])
    m20 = 0.5 * (tri[2] + tri[0])
    return [np.array([tri[0], m01, m20]), np.array([tri[1], m12, m01]),
            np.array([tri[2], m20, m12]), np.array([m01, m12, m20])]


def _duffy_vertex(tri, n):
    """Tensor GL nodes concentrated toward vertex 0 (Duffy transform)."""
    t, wt = _gl01(n)
    s, ws = _gl01(n)
    T, S = np.meshgrid(t, s, indexing="ij")
    WT, WS = np.meshgrid(wt, ws, indexing="ij")
    ray = (1.0 - S)[..., None] * (tri[1] - tri[0]) + S[..., None] * (tri[2] - tri[0])
    pts = tri[0] + T[..., None] * ray
    w = (WT * WS * T) * 2.0 * tri_area(tri)
    return pts.reshape(-1, 3), w.ravel()


def _closest_point_in_triangle(tri, p):
    a, b, c = tri
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return a
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return b
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        return a + ab * (d1 / (d1 - d3))
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return c
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        return a + ac * (d2 / (d2 - d6))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)))
    denom = 1.0 / (va + vb + vc)
    return a + ab * (vb * denom) + ac * (vc * denom)


def _radial_graded_duffy(tri, d_rel, ratio=0.3, n_t=6, n_s=8):
    """Duffy nodes from vertex 0 with radial panels graded down to ~d_rel.

    For observation points at small distance d from the triangle, the Duffy
    integrand develops a boundary layer at radius ~ d; geometric radial panels
    reaching below that scale resolve it.  For d = 0 (point on the triangle)
    the Duffy Jacobian regularizes the integrand completely and only a few
    panels are used, which also keeps nodes clear of the singular point."""
    t0 = max(d_rel, 0.3 ** 4) if d_rel <= 1e-12 else max(d_rel, 1e-13)
    breaks = [1.0]
    while breaks[-1] > t0:
        breaks.append(breaks[-1] * ratio)
    breaks = np.array([0.0] + breaks[::-1])
    gt, wt = _gl01(n_t)
    gs, ws = _gl01(n_s)
    t_nodes = (breaks[:-1, None] + np.diff(breaks)[:, None] * gt[None, :]).ravel()
    t_wts = (np.diff(breaks)[:, None] * wt[None, :]).ravel()
    T, S = np.meshgrid(t_nodes, gs, indexing="ij")
    WT, WS = np.meshgrid(t_wts, ws, indexing="ij")
    ray = (1.0 - S)[..., None] * (tri[1] - tri[0]) + S[..., None] * (tri[2] - tri[0])
    pts = tri[0] + T[..., None] * ray
    w = (WT * WS * T) * 2.0 * tri_area(tri)
    return pts.reshape(-1, 3), w.ravel()


def inner_integral(kernel, tri, u, n_far=12, n_duffy=8):
    """int_tri kernel(u, y) dy: collapsed GL when u is well separated,
    distance-graded Duffy pieces split at the closest point otherwise."""
    c = _closest_point_in_triangle(tri, u)
    d = np.linalg.norm(u - c)
    h = max(np.linalg.norm(tri[1] - tri[0]), np.linalg.norm(tri[2] - tri[0]),
            np.linalg.norm(tri[2] - tri[1]))
    if d > 0.6 * h:
        pts, w = collapsed_nodes(tri, n_far)
        return np.sum(w * kernel(u, pts))
    total = 0.0 + 0.0j
    for i in range(3):
        sub = np.array([c, tri[i], tri[(i + 1) % 3]])
        if tri_area(sub) < 1e-14 * tri_area(tri):
            continue
        pts, w = _radial_graded_duffy(sub, 0.5 * d / h, n_t=n_duffy, n_s=n_duffy + 2)
        total += np.sum(w * kernel(u, pts))
    return total


def pair_integral(kernel, tri_p, tri_q, tol=1e-9, max_depth=18):
    """int_P int_Q kernel(u, y) dQ dP.

    Adaptive subdivision of the outer triangle with an absolute error budget
    proportional to cell area; the inner integrals use the distance-graded
    Duffy scheme, so singular and nearly singular pairs converge without any
    closed forms or extraction."""

    def outer_value(tri, n):
        nodes, weights = collapsed_nodes(tri, n)
        vals = np.array([inner_integral(kernel, tri_q, u) for u in nodes])
        return np.sum(weights * vals)

    rough = outer_value(tri_p, 6)
    scale = max(abs(rough), 1e-30)
    area_root = tri_area(tri_p)
    unresolved = [0.0]

    def recurse(tri, depth):
        v1 = outer_value(tri, 4)
        v2 = outer_value(tri, 7)
        budget = 0.3 * tol * scale * (tri_area(tri) / area_root)
        if abs(v1 - v2) <= budget:
            return v2
        if depth >= max_depth:
            unresolved[0] += abs(v1 - v2)
            return v2
        return sum(recurse(ch, depth + 1) for ch in _children(tri))

    total = recurse(tri_p, 0)
    if unresolved[0] > 3.0 * tol * scale:
        raise OracleError(
            f"outer adaptivity exhausted with residual {unresolved[0] / scale:.2e}")
    return total


def _shared_local(tri_ids_p, tri_ids_q):
    shared = set(tri_ids_p) & set(tri_ids_q)
    return tuple(i for i, v in enumerate(tri_ids_p) if v in shared)


def _halves(basis, m):
    return [(int(basis.plus_tri[m]), 1.0, basis.mesh.vertices[basis.plus_free_vertex[m]]),
            (int(basis.minus_tri[m]), -1.0, basis.mesh.vertices[basis.minus_free_vertex[m]])]


def efie_entry_oracle(mesh, basis, m, n, k, tol=1e-9):
    """(Z_A[m,n], Z_Phi[m,n]) by direct quadrature of the raw kernels."""
    corners = mesh.corners()
    areas = mesh.areas()
    tris = mesh.triangles
    za = 0.0 + 0.0j
    zphi = 0.0 + 0.0j
    for P, sa, va in _halves(basis, m):
        for Q, sb, vb in _halves(basis, n):
            def vec_kernel(u, y, va=va, vb=vb):
                R = np.linalg.norm(y - u[None, :], axis=1)
                G = np.exp(1j * k * R) / (FOUR_PI * R)
                return G * ((y - vb) @ (u - va))

            def sca_kernel(u, y):
                R = np.linalg.norm(y - u[None, :], axis=1)
                return np.exp(1j * k * R) / (FOUR_PI * R)

            cab = sa * sb / (4.0 * areas[P] * areas[Q])
            za += cab * pair_integral(vec_kernel, corners[P], corners[Q], tol)
            zphi += (sa / areas[P]) * (sb / areas[Q]) * pair_integral(
                sca_kernel, corners[P], corners[Q], tol)
    return (-1j * k) * za, (-1.0 / (1j * k)) * zphi


def k_entry_oracle(mesh, basis, m, n, k, tol=1e-9):
    """K[m,n] = -(f_m, n x (grad G x f_n)) by direct quadrature."""
    corners = mesh.corners()
    areas = mesh.areas()
    normals = mesh.normals()
    tris = mesh.triangles
    total = 0.0 + 0.0j
    for P, sa, va in _halves(basis, m):
        nP = normals[P]
        for Q, sb, vb in _halves(basis, n):
            nQ = normals[Q]
            coplanar = (abs(abs(nP @ nQ) - 1.0) < 1e-13
                        and abs((corners[Q][0] - corners[P][0]) @ nP) < 1e-13)
            if coplanar:
                continue

            def kern(u, y, va=va, vb=vb, nP=nP):
                d = u[None, :] - y
                R = np.linalg.norm(d, axis=1)
                g = (1j * k * R - 1.0) * np.exp(1j * k * R) / (FOUR_PI * R ** 3)
                ua = u - va
                yb = y - vb
                return g * ((d @ ua) * (yb @ nP) - (yb @ ua) * (d @ nP))

            cab = sa * sb / (4.0 * areas[P] * areas[Q])
            total -= cab * pair_integral(kern, corners[P], corners[Q], tol)
    return total
