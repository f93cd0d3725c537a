"""Numba kernels for the dense Galerkin double integrals (far pairs).

Pairs of triangles sharing at least one vertex are skipped here and handled
by the singularity-extraction path in `assembly`.  The loops run in a fixed
serial order, so assembled matrices are bit-for-bit reproducible.
"""

import numpy as np
from numba import njit

FOUR_PI = 4.0 * np.pi


@njit(cache=True, fastmath=False)
def _share_vertex(tri_p, tri_q):
    for i in range(3):
        for j in range(3):
            if tri_p[i] == tri_q[j]:
                return True
    return False


@njit(cache=True, fastmath=False)
def far_pair_sums(tris, verts3, areas, normals, centroids, diams,
                  pts_base, w_base, pts_fine, w_fine, close_ratio,
                  k, tri_edges, tri_signs, n_edges, want_k_op):
    """Accumulate the three raw kernel sums over all far triangle pairs.

    Returns (smooth double-layer M, scalar S, magnetic raw Kr):
        M[m, n]  = sum int int f_m . f_n  G dS dS'
        S[m, n]  = sum int int (div f_m)(div f_n) G dS dS'
        Kr[m, n] = -sum int int f_m . (n_P x (grad_r G x f_n)) dS dS'
    """
    F = tris.shape[0]
    M = np.zeros((n_edges, n_edges), dtype=np.complex128)
    S = np.zeros((n_edges, n_edges), dtype=np.complex128)
    Kr = np.zeros((n_edges, n_edges), dtype=np.complex128)

    nb = pts_base.shape[1]
    nf = pts_fine.shape[1]

    for P in range(F):
        ap = areas[P]
        nP = normals[P]
        for Q in range(F):
            if P == Q or _share_vertex(tris[P], tris[Q]):
                continue
            dc = 0.0
            for c in range(3):
                t = centroids[P, c] - centroids[Q, c]
                dc += t * t
            dc = np.sqrt(dc)
            dd = diams[P] if diams[P] > diams[Q] else diams[Q]
            if dc < close_ratio * dd:
                ng, nh = nf, nf
                xg, wg = pts_fine[P], w_fine[P]
                xh, wh = pts_fine[Q], w_fine[Q]
            else:
                ng, nh = nb, nb
                xg, wg = pts_base[P], w_base[P]
                xh, wh = pts_base[Q], w_base[Q]

            aq = areas[Q]
            aloc = np.zeros((3, 3), dtype=np.complex128)
            kloc = np.zeros((3, 3), dtype=np.complex128)
            m1 = 0.0 + 0.0j

            for g in range(ng):
                ux, uy, uz = xg[g, 0], xg[g, 1], xg[g, 2]
                wgg = wg[g]
                for h in range(nh):
                    dx = ux - xh[h, 0]
                    dy = uy - xh[h, 1]
                    dz = uz - xh[h, 2]
                    R = np.sqrt(dx * dx + dy * dy + dz * dz)
                    ph = np.exp(1j * k * R)
                    G = ph / (FOUR_PI * R)
                    w2 = wgg * wh[h]
                    Gw = w2 * G
                    m1 += Gw
                    if want_k_op:
                        gfac = w2 * (1j * k * R - 1.0) * ph / (FOUR_PI * R * R * R)
                        nd = nP[0] * dx + nP[1] * dy + nP[2] * dz
                    for b in range(3):
                        ybx = xh[h, 0] - verts3[Q, b, 0]
                        yby = xh[h, 1] - verts3[Q, b, 1]
                        ybz = xh[h, 2] - verts3[Q, b, 2]
                        if want_k_op:
                            nyb = nP[0] * ybx + nP[1] * yby + nP[2] * ybz
                        for a in range(3):
                            uax = ux - verts3[P, a, 0]
                            uay = uy - verts3[P, a, 1]
                            uaz = uz - verts3[P, a, 2]
                            ff = uax * ybx + uay * yby + uaz * ybz
                            aloc[a, b] += Gw * ff
                            if want_k_op:
                                ud = uax * dx + uay * dy + uaz * dz
                                kloc[a, b] += gfac * (ud * nyb - ff * nd)

            for a in range(3):
                m = tri_edges[P, a]
                sa = tri_signs[P, a]
                for b in range(3):
                    n = tri_edges[Q, b]
                    sb = tri_signs[Q, b]
                    cab = sa * sb / (4.0 * ap * aq)
                    M[m, n] += cab * aloc[a, b]
                    S[m, n] += (sa / ap) * (sb / aq) * m1
                    if want_k_op:
                        Kr[m, n] -= cab * kloc[a, b]
    return M, S, Kr


@njit(cache=True, fastmath=False)
def gram_sums(tris, verts3, areas, pts, w, tri_edges, tri_signs, n_edges):
    """[G]_mn = (f_m, f_n), nonzero only for edge pairs sharing a triangle."""
    F = tris.shape[0]
    G = np.zeros((n_edges, n_edges), dtype=np.float64)
    nq = pts.shape[1]
    for P in range(F):
        ap = areas[P]
        aloc = np.zeros((3, 3), dtype=np.float64)
        for g in range(nq):
            wgt = w[P, g]
            for a in range(3):
                uax = pts[P, g, 0] - verts3[P, a, 0]
                uay = pts[P, g, 1] - verts3[P, a, 1]
                uaz = pts[P, g, 2] - verts3[P, a, 2]
                for b in range(3):
                    ubx = pts[P, g, 0] - verts3[P, b, 0]
                    uby = pts[P, g, 1] - verts3[P, b, 1]
                    ubz = pts[P, g, 2] - verts3[P, b, 2]
                    aloc[a, b] += wgt * (uax * ubx + uay * uby + uaz * ubz)
        for a in range(3):
            m = tri_edges[P, a]
            sa = tri_signs[P, a]
            for b in range(3):
                n = tri_edges[P, b]
                sb = tri_signs[P, b]
                G[m, n] += sa * sb / (4.0 * ap * ap) * aloc[a, b]
    return G
