"""Quadrature rules on triangles.

Symmetric (Dunavant) rules cover polynomial degrees 1..6; higher degrees fall
back to a collapsed Gauss-Legendre tensor rule on the square.  Barycentric
weights always sum to one, so physical weights are `weight * area`.

Graded panel generators supply outer quadrature for singular Galerkin pairs:
composite geometric subdivision toward a shared edge or vertex resolves the
log-type behavior of the (analytically integrated) inner potential.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np


def _orbit3(a: float) -> np.ndarray:
    b = 1.0 - 2.0 * a
    return np.array([[b, a, a], [a, b, a], [a, a, b]])


def _orbit6(a: float, b: float) -> np.ndarray:
    c = 1.0 - a - b
    return np.array([
        [a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a],
    ])


_DUNAVANT = {
    1: ([(np.array([[1 / 3, 1 / 3, 1 / 3]]), 1.0)]),
    2: ([(_orbit3(1 / 6), 1 / 3)]),
    3: ([(np.array([[1 / 3, 1 / 3, 1 / 3]]), -27 / 48),
         (_orbit3(1 / 5), 25 / 48)]),
    4: ([(_orbit3(0.445948490915965), 0.223381589678011),
         (_orbit3(0.091576213509771), 0.109951743655322)]),
    5: ([(np.array([[1 / 3, 1 / 3, 1 / 3]]), 0.225),
         (_orbit3(0.470142064105115), 0.132394152788506),
         (_orbit3(0.101286507323456), 0.125939180544827)]),
    6: ([(_orbit3(0.249286745170910), 0.116786275726379),
         (_orbit3(0.063089014491502), 0.050844906370207),
         (_orbit6(0.053145049844817, 0.310352451033784), 0.082851075618374)]),
}


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Barycentric nodes and weights exact for polynomials of `degree`.

    Returns (bary (n, 3), weights (n,)); weights sum to 1.
    """
    if degree < 1:
        degree = 1
    if degree in _DUNAVANT:
        pts, wts = [], []
        for block, w in _DUNAVANT[degree]:
            pts.append(block)
            wts.append(np.full(len(block), w))
        bary = np.vstack(pts)
        weights = np.concatenate(wts)
    else:
        n = (degree + 3) // 2 + 1
        bary, weights = collapsed_rule(n)
    bary.flags.writeable = False
    weights.flags.writeable = False
    return bary, weights


@lru_cache(maxsize=None)
def collapsed_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule collapsed onto the triangle (n*n points).

    Exact for total degree <= 2n - 3; independent of the symmetric tables,
    which makes it a useful cross-check rule.
    """
    x, wx = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * wx
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    xi = U.ravel()
    eta = (V * (1.0 - U)).ravel()
    w = (WU * WV * (1.0 - U)).ravel() * 2.0  # normalize to sum 1
    bary = np.column_stack([1.0 - xi - eta, xi, eta])
    return bary, w


def physical_nodes(tri: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Map barycentric nodes onto a triangle given as (3, 3) vertex rows."""
    return bary @ tri


def triangle_area(tri: np.ndarray) -> float:
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    return 0.5 * float(np.linalg.norm(n))


def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _geometric_breaks(depth: int, ratio: float) -> np.ndarray:
    """0 < ratio^depth < ... < ratio < 1 with a closing zero at the front."""
    pts = [0.0] + [ratio ** m for m in range(depth, -1, -1)]
    return np.array(pts)


def _panels_1d(breaks: np.ndarray, n: int):
    g, w = _gauss01(n)
    xs = (breaks[:-1, None] + np.diff(breaks)[:, None] * g[None, :]).ravel()
    ws = (np.diff(breaks)[:, None] * w[None, :]).ravel()
    return xs, ws


def edge_graded_panels(tri: np.ndarray, edge_local: Tuple[int, int],
                       depth: int = 12, ratio: float = 0.25,
                       n_t: int = 6, n_s: int = 8, s_depth: int = 0):
    """Quadrature on `tri` graded toward one of its edges.

    Parametrize P(s, t) = (1-t) * ((1-s) a + s b) + t c with (a, b) the graded
    edge; panels in t follow a geometric sequence so integrands behaving like
    t^p * log(t) near the edge are integrated to near machine precision.
    With s_depth > 0 the s direction is also graded geometrically toward both
    edge endpoints, which resolves corner-type non-smoothness there.

    Returns (points (n, 3), weights (n,)) with absolute weights.
    """
    ia, ib = edge_local
    ic = 3 - ia - ib
    a, b, c = tri[ia], tri[ib], tri[ic]
    area2 = 2.0 * triangle_area(tri)
    t_nodes, t_wts = _panels_1d(_geometric_breaks(depth, ratio), n_t)
    if s_depth > 0:
        half = _geometric_breaks(s_depth, ratio) * 0.5
        s_breaks = np.concatenate([half, (1.0 - half)[::-1][1:]])
        s_nodes, s_wts = _panels_1d(s_breaks, n_s)
    else:
        s_nodes, s_wts = _gauss01(n_s)

    T, S = np.meshgrid(t_nodes, s_nodes, indexing="ij")
    WT, WS = np.meshgrid(t_wts, s_wts, indexing="ij")
    base = (1.0 - S)[..., None] * a + S[..., None] * b
    P = (1.0 - T)[..., None] * base + T[..., None] * c
    W = WT * WS * area2 * (1.0 - T)
    return P.reshape(-1, 3), W.ravel()


def vertex_graded_panels(tri: np.ndarray, vertex_local: int,
                         depth: int = 12, ratio: float = 0.25,
                         n_u: int = 6, n_s: int = 8):
    """Quadrature on `tri` graded radially toward one of its vertices."""
    ia = vertex_local
    a = tri[ia]
    b, c = tri[(ia + 1) % 3], tri[(ia + 2) % 3]
    area2 = 2.0 * triangle_area(tri)
    breaks = _geometric_breaks(depth, ratio)
    gs, ws = _gauss01(n_s)
    gu, wu = _gauss01(n_u)

    pts, wts = [], []
    for u0, u1 in zip(breaks[:-1], breaks[1:]):
        u = u0 + (u1 - u0) * gu
        w_u = (u1 - u0) * wu
        U, S = np.meshgrid(u, gs, indexing="ij")
        WU, WS = np.meshgrid(w_u, ws, indexing="ij")
        ray = (1.0 - S)[..., None] * (b - a) + S[..., None] * (c - a)
        P = a + U[..., None] * ray
        W = WU * WS * area2 * U
        pts.append(P.reshape(-1, 3))
        wts.append(W.ravel())
    return np.vstack(pts), np.concatenate(wts)


def self_graded_panels(tri: np.ndarray, depth: int = 10, ratio: float = 0.25,
                       n_t: int = 5, n_s: int = 7, s_depth: int = 0):
    """Quadrature on `tri` graded toward all three edges (self-pair outer rule).

    Splits at the centroid into three triangles and grades each toward its
    boundary edge, where the inner static potential loses smoothness; the
    s grading resolves the corners where two boundary edges meet.
    """
    centroid = tri.mean(axis=0)
    pts, wts = [], []
    for i in range(3):
        sub = np.array([tri[i], tri[(i + 1) % 3], centroid])
        p, w = edge_graded_panels(sub, (0, 1), depth=depth, ratio=ratio,
                                  n_t=n_t, n_s=n_s, s_depth=s_depth)
        pts.append(p)
        wts.append(w)
    return np.vstack(pts), np.concatenate(wts)
