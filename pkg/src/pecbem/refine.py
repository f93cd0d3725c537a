"""Dyadic mesh refinement with full genealogy.

Each refinement step splits every triangle into four children by connecting
edge midpoints (flat refinement, no reprojection by default), so function
spaces on consecutive levels nest exactly.  The genealogy records, per level:

  * ``edge_children[l][e]``  -> the two level-(l+1) edges covering edge e,
  * ``edge_midpoint[l][e]``  -> the level-(l+1) vertex at the midpoint of e,
  * ``face_children[l][f]``  -> the four child faces (corner0..2, center),
  * vertices keep their ids (level-l vertex v is level-(l+1) vertex v).
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import MeshError
from .mesh import SurfaceMesh, Topology, build_topology


@dataclass(frozen=True)
class RefinementHierarchy:
    """J nested dyadic refinements of a coarse mesh (level 0 .. level J)."""

    meshes: tuple            # SurfaceMesh per level
    topologies: tuple        # Topology per level
    edge_children: tuple     # per level l < J: (E_l, 2) int array
    edge_midpoint: tuple     # per level l < J: (E_l,) int array (vertex id at l+1)
    face_children: tuple     # per level l < J: (F_l, 4) int array

    @property
    def levels(self) -> int:
        """Number of refinement steps J."""
        return len(self.meshes) - 1

    @property
    def fine(self) -> SurfaceMesh:
        return self.meshes[-1]

    @property
    def fine_topology(self) -> Topology:
        return self.topologies[-1]

    def vertex_birth_level(self) -> np.ndarray:
        """Level of origin of each finest-level vertex (0 for coarse vertices)."""
        J = self.levels
        counts = [m.num_vertices for m in self.meshes]
        birth = np.empty(counts[-1], dtype=np.int64)
        birth[: counts[0]] = 0
        for l in range(J):
            birth[counts[l]: counts[l + 1]] = l + 1
        return birth

    def face_ancestry(self, level_from: int, face: int) -> int:
        """Walk a finest-level face back to its ancestor at `level_from`."""
        f = face
        for l in range(self.levels - 1, level_from - 1, -1):
            parents = self.face_children[l]
            # children of face p are 4p..4p+3 by construction
            f = f // 4
            assert face in () or f < len(parents)
        return f


def _refine_once(mesh: SurfaceMesh, topo: Topology, reproject_unit_sphere: bool):
    V, E, F = mesh.num_vertices, topo.num_edges, mesh.num_triangles
    old = mesh.vertices
    mids = 0.5 * (old[topo.edges[:, 0]] + old[topo.edges[:, 1]])
    verts = np.vstack([old, mids])
    if reproject_unit_sphere:
        # snap midpoint vertices back onto the unit sphere (sphere studies only)
        norms = np.linalg.norm(verts[V:], axis=1)
        verts = verts.copy()
        verts[V:] = verts[V:] / norms[:, None]

    edge_lookup = {(int(a), int(b)): e for e, (a, b) in enumerate(topo.edges)}

    def mid(u, v):
        key = (u, v) if u < v else (v, u)
        return V + edge_lookup[key]

    tris = np.empty((4 * F, 3), dtype=np.int64)
    for f, (a, b, c) in enumerate(mesh.triangles):
        a, b, c = int(a), int(b), int(c)
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        tris[4 * f + 0] = (a, mab, mca)
        tris[4 * f + 1] = (b, mbc, mab)
        tris[4 * f + 2] = (c, mca, mbc)
        tris[4 * f + 3] = (mab, mbc, mca)

    fine = SurfaceMesh(vertices=verts, triangles=tris)
    fine_topo = build_topology(fine)

    fine_lookup = {(int(a), int(b)): e for e, (a, b) in enumerate(fine_topo.edges)}

    def fedge(u, v):
        key = (u, v) if u < v else (v, u)
        return fine_lookup[key]

    edge_children = np.empty((E, 2), dtype=np.int64)
    for e, (a, b) in enumerate(topo.edges):
        m = V + e
        edge_children[e] = (fedge(int(a), m), fedge(m, int(b)))
    edge_midpoint = np.arange(V, V + E, dtype=np.int64)
    face_children = np.arange(4 * F, dtype=np.int64).reshape(F, 4)

    return fine, fine_topo, edge_children, edge_midpoint, face_children


def dyadic_refine(mesh: SurfaceMesh, J: int, reproject_unit_sphere: bool = False) -> RefinementHierarchy:
    """Refine `mesh` J times dyadically, recording the genealogy.

    Flat midpoint refinement preserves total area exactly and keeps the
    div-conforming spaces nested; set `reproject_unit_sphere` only for
    sphere convergence studies (nestedness is then lost).
    """
    if J < 0:
        raise MeshError(f"J must be >= 0, got {J}")
    meshes: List[SurfaceMesh] = [mesh]
    topos: List[Topology] = [build_topology(mesh)]
    e_ch, e_mid, f_ch = [], [], []
    for _ in range(J):
        fine, ftopo, ec, em, fc = _refine_once(meshes[-1], topos[-1], reproject_unit_sphere)
        meshes.append(fine)
        topos.append(ftopo)
        e_ch.append(ec)
        e_mid.append(em)
        f_ch.append(fc)
    return RefinementHierarchy(
        meshes=tuple(meshes),
        topologies=tuple(topos),
        edge_children=tuple(e_ch),
        edge_midpoint=tuple(e_mid),
        face_children=tuple(f_ch),
    )
