"""RWG space and single-level quasi-Helmholtz transformation matrices.

Conventions
-----------
RWG functions carry no edge-length normalization:

    f_e(r) = (r - p+)/(2 A+)  on the plus triangle,
             (p- - r)/(2 A-)  on the minus triangle,

so the flux across the defining edge is 1 and int_{T+-} div f_e = +-1.  With
this normalization the loop and star transforms are +-1 incidence matrices
and Lambda^T Lambda is literally the vertex graph Laplacian of the mesh.

Entry rules (edge e stored as (v1, v2), plus triangle = the one traversing
v1 -> v2):

    star  [e, c] = +1 if c is the plus triangle of e, -1 if the minus one;
    loop  [e, v] = +1 if v = v1, -1 if v = v2.

The loop rule is the directed-edge incidence: it is the unique +-1 convention
for which Sigma_full^T Lambda_full = 0 holds as an integer identity and the
diagonal of Lambda^T Lambda counts the triangles around each vertex.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SingularBasisError, UnsupportedGeometryError
from .mesh import Topology


@dataclass(frozen=True)
class RwgBasis:
    """One div-conforming function per interior edge of a closed mesh."""

    topology: Topology
    plus_tri: np.ndarray
    minus_tri: np.ndarray
    plus_free_vertex: np.ndarray
    minus_free_vertex: np.ndarray

    @property
    def size(self) -> int:
        return len(self.plus_tri)

    @property
    def mesh(self):
        return self.topology.mesh


def rwg_space(topology: Topology) -> RwgBasis:
    """Build the RWG space (one function per edge; closed surfaces only)."""
    edges = topology.edges
    tris = topology.mesh.triangles
    plus = topology.edge_tri_plus
    minus = topology.edge_tri_minus

    def free_vertex(tri_id, a, b):
        tri = tris[tri_id]
        for v in tri:
            if v != a and v != b:
                return int(v)
        raise AssertionError("degenerate triangle in free-vertex lookup")

    pf = np.array([free_vertex(plus[e], a, b) for e, (a, b) in enumerate(edges)],
                  dtype=np.int64)
    mf = np.array([free_vertex(minus[e], a, b) for e, (a, b) in enumerate(edges)],
                  dtype=np.int64)
    return RwgBasis(topology=topology, plus_tri=plus.copy(), minus_tri=minus.copy(),
                    plus_free_vertex=pf, minus_free_vertex=mf)


@dataclass(frozen=True)
class SparseTransform:
    """Sparse map from an auxiliary basis to RWG coefficients.

    `levels[j]` is the hierarchical level of column j (0 for single-level
    bases); `kind` is one of loop | star | h-loop | h-n-sol | composite.
    """

    matrix: sp.csc_matrix
    levels: np.ndarray
    kind: str

    def __post_init__(self):
        m = sp.csc_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "levels", np.asarray(self.levels, dtype=np.int64))
        if len(self.levels) != m.shape[1]:
            raise SingularBasisError("one level index per column required")
        occupancy = np.diff(m.indptr)
        if np.any(occupancy == 0):
            j = int(np.argmin(occupancy))
            raise SingularBasisError(f"empty column {j} in {self.kind} transform")
        if len(self.levels) and self.levels.min() < 0:
            raise SingularBasisError("negative level index")

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_loop_kind(self) -> bool:
        return self.kind in ("loop", "h-loop")

    def is_star_kind(self) -> bool:
        return self.kind in ("star", "h-n-sol")


def _require_genus_zero(topology: Topology, what: str):
    if not topology.is_genus_zero():
        raise UnsupportedGeometryError(
            f"{what} requires genus-0 components (harmonic subspace unsupported)")


def _drop_highest_per_group(n: int, labels: np.ndarray) -> np.ndarray:
    """Boolean keep-mask dropping the highest index within each label group."""
    keep = np.ones(n, dtype=bool)
    for g in np.unique(labels):
        keep[np.max(np.nonzero(labels == g)[0])] = False
    return keep


def star_matrix(topology: Topology, drop_one: bool = True) -> SparseTransform:
    """Cell-attached non-solenoidal transform Sigma.

    With `drop_one`, the highest-index cell of each connected component is
    dropped so the remaining columns are linearly independent (F - 1 columns
    per sphere-like component).
    """
    _require_genus_zero(topology, "star basis")
    E = topology.num_edges
    F = topology.mesh.num_triangles
    rows = np.concatenate([np.arange(E), np.arange(E)])
    cols = np.concatenate([topology.edge_tri_plus, topology.edge_tri_minus])
    vals = np.concatenate([np.ones(E), -np.ones(E)])
    full = sp.csc_matrix((vals, (rows, cols)), shape=(E, F))
    if drop_one:
        face_comp = topology.vertex_components[topology.mesh.triangles[:, 0]]
        keep = _drop_highest_per_group(F, face_comp)
        full = full[:, keep]
    return SparseTransform(matrix=full, levels=np.zeros(full.shape[1], dtype=np.int64),
                           kind="star")


def loop_matrix(topology: Topology, drop_one: bool = True) -> SparseTransform:
    """Vertex-attached solenoidal transform Lambda (genus-0 components only)."""
    _require_genus_zero(topology, "loop basis")
    E = topology.num_edges
    V = topology.mesh.num_vertices
    edges = topology.edges
    rows = np.concatenate([np.arange(E), np.arange(E)])
    cols = np.concatenate([edges[:, 0], edges[:, 1]])
    vals = np.concatenate([np.ones(E), -np.ones(E)])
    full = sp.csc_matrix((vals, (rows, cols)), shape=(E, V))
    if drop_one:
        keep = _drop_highest_per_group(V, topology.vertex_components)
        full = full[:, keep]
    return SparseTransform(matrix=full, levels=np.zeros(full.shape[1], dtype=np.int64),
                           kind="loop")


def graph_laplacian(loop_transform: SparseTransform) -> sp.csr_matrix:
    """L = Lambda^T Lambda; symmetric PSD with the per-component constants
    as null space when built from the undropped loop transform."""
    if not loop_transform.is_loop_kind():
        raise SingularBasisError("graph_laplacian expects a loop-kind transform")
    m = loop_transform.matrix
    return (m.T @ m).tocsr()


@dataclass(frozen=True)
class DiagonalScaling:
    """Strictly positive columnwise rescaling of a transform."""

    values: np.ndarray
    provenance: str          # "dyadic-power" | "jacobi"
    exponent: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
            raise SingularBasisError("diagonal scaling must be strictly positive")

    def as_operator(self) -> sp.dia_matrix:
        return sp.diags(self.values)


def level_scaling(transform: SparseTransform, s: float = 1.0) -> DiagonalScaling:
    """Dyadic level scaling: 2^(s*l) for loop kinds, 2^(-l) for star kinds."""
    if transform.kind == "composite":
        raise SingularBasisError("level_scaling applies to loop/star kinds, not composites")
    levels = transform.levels
    if transform.is_loop_kind():
        vals = np.power(2.0, s * levels)
        return DiagonalScaling(values=vals, provenance="dyadic-power", exponent=s)
    if transform.is_star_kind():
        vals = np.power(2.0, -levels.astype(np.float64))
        return DiagonalScaling(values=vals, provenance="dyadic-power", exponent=-1.0)
    raise SingularBasisError(f"unknown transform kind {transform.kind!r}")


def composite_basis(loop_transform: SparseTransform, s: float,
                    star_transform: SparseTransform, k: float) -> SparseTransform:
    """Concatenate [X D^s / sqrt(k) | S D_Sigma sqrt(k)] columnwise.

    X is any loop-kind transform (levels all zero reduce D^s to the identity,
    recovering the plain loop-star rescaling [Lambda/sqrt(k) | Sigma sqrt(k)]).
    """
    if k <= 0.0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    if loop_transform.shape[0] != star_transform.shape[0]:
        raise ValueError("loop and star transforms act on different RWG spaces")
    d_loop = level_scaling(loop_transform, s).values / np.sqrt(k)
    d_star = level_scaling(star_transform).values * np.sqrt(k)
    left = loop_transform.matrix @ sp.diags(d_loop)
    right = star_transform.matrix @ sp.diags(d_star)
    mat = sp.hstack([left, right], format="csc")
    levels = np.concatenate([loop_transform.levels, star_transform.levels])
    return SparseTransform(matrix=mat, levels=levels, kind="composite")


def scale_columns(transform: SparseTransform, scaling: DiagonalScaling) -> SparseTransform:
    """Apply a columnwise diagonal rescaling, keeping kind and levels."""
    mat = transform.matrix @ scaling.as_operator()
    return SparseTransform(matrix=mat.tocsc(), levels=transform.levels,
                           kind=transform.kind)


def concat_transforms(a: SparseTransform, b: SparseTransform) -> SparseTransform:
    """Plain columnwise concatenation (no scalings), kind 'composite'."""
    if a.shape[0] != b.shape[0]:
        raise ValueError("transforms act on different RWG spaces")
    mat = sp.hstack([a.matrix, b.matrix], format="csc")
    return SparseTransform(matrix=mat, levels=np.concatenate([a.levels, b.levels]),
                           kind="composite")
