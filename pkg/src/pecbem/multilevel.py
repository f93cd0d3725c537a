"""Hierarchical bases over nested refinements and their unstructured stand-in.

The hierarchical loops follow the classical multilevel (Yserentant-type)
splitting of the nodal space: level-0 columns are coarse hat functions, the
level-l block holds the level-l hats of the vertices created at step l, all
interpolated down to the finest mesh by repeated midpoint averaging and
converted to solenoidal RWG coefficients through the fine loop transform.

The hierarchical non-solenoidal basis keeps, per refined face, three of the
four child star functions (the center child is dropped), each represented on
the finest mesh by exact edge-flux interpolation; on unstructured meshes an
agglomeration tree over the dual graph provides the multilevel structure
instead.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from .basis import SparseTransform, _drop_highest_per_group, loop_matrix, star_matrix
from .errors import MeshError, UnsupportedGeometryError
from .mesh import Topology
from .refine import RefinementHierarchy


def _edge_flux_prolongation(hier: RefinementHierarchy, level: int) -> sp.csc_matrix:
    """One refinement step of RWG coefficients: level -> level + 1.

    The fine coefficient on fine edge f is the flux of the coarse function
    across f; for flat midpoint refinement these fluxes are exact rational
    values obtained from the midpoint value of the coarse function.
    """
    coarse_topo = hier.topologies[level]
    fine_mesh = hier.meshes[level + 1]
    fine_topo = hier.topologies[level + 1]
    E_c, E_f = coarse_topo.num_edges, fine_topo.num_edges

    fine_edges = fine_topo.edges
    fine_plus = fine_topo.edge_tri_plus
    fine_minus = fine_topo.edge_tri_minus
    fverts = fine_mesh.vertices
    fnormals = fine_mesh.normals()
    coarse_areas = hier.meshes[level].areas()
    coarse_tris = hier.meshes[level].triangles
    cverts = hier.meshes[level].vertices

    # interior fine edges of each coarse face: the edges of its center child
    center_child = hier.face_children[level][:, 3]
    fine_tri_edges = fine_topo.tri_edges

    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []

    for e in range(E_c):
        tp = int(coarse_topo.edge_tri_plus[e])
        tm = int(coarse_topo.edge_tri_minus[e])
        a, b = coarse_topo.edges[e]
        candidates = set(int(x) for x in hier.edge_children[level][e])
        for t in (tp, tm):
            candidates.update(int(x) for x in fine_tri_edges[center_child[t]])

        for f in sorted(candidates):
            # pick an adjacent fine triangle lying inside the coarse support
            side = None
            for ft in (int(fine_plus[f]), int(fine_minus[f])):
                parent = ft // 4
                if parent == tp or parent == tm:
                    side = ft
                    break
            if side is None:
                continue
            parent = side // 4
            sign = 1.0 if parent == tp else -1.0
            tri = coarse_tris[parent]
            free = [v for v in tri if v != a and v != b]
            p = cverts[free[0]] if len(free) == 1 else None
            if p is None:
                raise AssertionError("coarse edge not part of its triangle")
            v1, v2 = fine_edges[f]
            mid = 0.5 * (fverts[v1] + fverts[v2])
            tangent = fverts[v2] - fverts[v1]
            nu = np.cross(tangent, fnormals[side])  # length * outward normal of `side`
            flux = sign * float(nu @ (mid - p)) / (2.0 * coarse_areas[parent])
            if flux != 0.0:
                rows.append(f)
                cols.append(e)
                vals.append(flux)

    return sp.csc_matrix((vals, (rows, cols)), shape=(E_f, E_c))


def coarse_to_fine_rwg(hier: RefinementHierarchy, level: int) -> sp.csc_matrix:
    """Exact representation of level-`level` RWG coefficients on the finest mesh."""
    J = hier.levels
    if not 0 <= level <= J:
        raise MeshError(f"level must be in [0, {J}], got {level}")
    P = sp.identity(hier.topologies[level].num_edges, format="csc")
    for l in range(level, J):
        P = _edge_flux_prolongation(hier, l) @ P
    return sp.csc_matrix(P)


def _nodal_prolongation(hier: RefinementHierarchy, level: int) -> sp.csc_matrix:
    """Nodal interpolation of hat-function values: level -> level + 1."""
    V_c = hier.meshes[level].num_vertices
    V_f = hier.meshes[level + 1].num_vertices
    E_c = hier.topologies[level].num_edges
    edges = hier.topologies[level].edges
    rows = list(range(V_c)) + [V_c + e for e in range(E_c)] * 2
    cols = list(range(V_c)) + list(edges[:, 0]) + list(edges[:, 1])
    vals = [1.0] * V_c + [0.5] * (2 * E_c)
    return sp.csc_matrix((vals, (rows, cols)), shape=(V_f, V_c))


def hierarchical_nodal_loops(hier: RefinementHierarchy) -> SparseTransform:
    """Multilevel solenoidal transform Lambda_H on the finest mesh.

    Column count is V_J - 1 per genus-0 component (one coarse column dropped);
    every column is an integer-weighted combination of fine loops with dyadic
    interpolation weights, so Sigma_full^T Lambda_H = 0 holds exactly.
    """
    fine_topo = hier.fine_topology
    if not fine_topo.is_genus_zero():
        raise UnsupportedGeometryError("hierarchical loops require genus-0 components")
    J = hier.levels
    fine_loops = loop_matrix(fine_topo, drop_one=False).matrix

    # cumulative nodal interpolation from each level to the finest one
    to_fine = [None] * (J + 1)
    to_fine[J] = sp.identity(hier.meshes[J].num_vertices, format="csc")
    for l in range(J - 1, -1, -1):
        to_fine[l] = to_fine[l + 1] @ _nodal_prolongation(hier, l)

    blocks = []
    levels = []

    V0 = hier.meshes[0].num_vertices
    coarse_comp = hier.topologies[0].vertex_components
    keep = _drop_highest_per_group(V0, coarse_comp)
    blocks.append(fine_loops @ (to_fine[0][:, keep]))
    levels.extend([0] * int(keep.sum()))

    for l in range(1, J + 1):
        first_new = hier.meshes[l - 1].num_vertices
        last_new = hier.meshes[l].num_vertices
        new_ids = np.arange(first_new, last_new)
        blocks.append(fine_loops @ (to_fine[l][:, new_ids]))
        levels.extend([l] * len(new_ids))

    mat = sp.hstack(blocks, format="csc") if len(blocks) > 1 else blocks[0]
    return SparseTransform(matrix=sp.csc_matrix(mat),
                           levels=np.array(levels, dtype=np.int64), kind="h-loop")


def hierarchical_star(hier: RefinementHierarchy) -> SparseTransform:
    """Multilevel non-solenoidal transform Sigma_H on the finest mesh.

    Level 0: coarse star functions (one dropped per component); level l >= 1:
    for every level-(l-1) face, the star functions of three of its four
    children (center child dropped), interpolated to the finest mesh by
    edge-flux matching.  Column count is F_J - 1 per component.
    """
    J = hier.levels
    blocks = []
    levels = []

    coarse_stars = star_matrix(hier.topologies[0], drop_one=True).matrix
    blocks.append(coarse_to_fine_rwg(hier, 0) @ coarse_stars)
    levels.extend([0] * coarse_stars.shape[1])

    for l in range(1, J + 1):
        stars_l = star_matrix(hier.topologies[l], drop_one=False).matrix
        keep_children = hier.face_children[l - 1][:, :3].ravel()
        blocks.append(coarse_to_fine_rwg(hier, l) @ stars_l[:, keep_children])
        levels.extend([l] * len(keep_children))

    mat = sp.hstack(blocks, format="csc") if len(blocks) > 1 else blocks[0]
    return SparseTransform(matrix=sp.csc_matrix(mat),
                           levels=np.array(levels, dtype=np.int64), kind="h-n-sol")


@dataclass
class _Cluster:
    faces: np.ndarray
    depth: int
    children: List["_Cluster"] = field(default_factory=list)


def _dual_adjacency(topology: Topology) -> List[List[int]]:
    F = topology.mesh.num_triangles
    nbr: List[List[int]] = [[] for _ in range(F)]
    for p, m in zip(topology.edge_tri_plus, topology.edge_tri_minus):
        nbr[int(p)].append(int(m))
        nbr[int(m)].append(int(p))
    return [sorted(x) for x in nbr]


def _split_cluster(faces: np.ndarray, nbr: List[List[int]], branching: int) -> List[np.ndarray]:
    """Partition a connected face set into <= branching connected pieces.

    Seeds are chosen by farthest-point sampling on the dual graph; pieces grow
    by synchronized breadth-first rounds, which keeps them connected and
    roughly balanced.  Fully deterministic.
    """
    faces = np.sort(faces)
    n = len(faces)
    k = min(branching, n)
    inset = {int(f): i for i, f in enumerate(faces)}

    def bfs_dist(seeds):
        dist = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        queue = []
        for s in seeds:
            dist[inset[s]] = 0
            queue.append(s)
        head = 0
        while head < len(queue):
            f = queue[head]
            head += 1
            for g in nbr[f]:
                i = inset.get(g)
                if i is not None and dist[i] > dist[inset[f]] + 1:
                    dist[i] = dist[inset[f]] + 1
                    queue.append(g)
        return dist

    seeds = [int(faces[0])]
    while len(seeds) < k:
        dist = bfs_dist(seeds)
        far = int(np.max(dist))
        cand = faces[dist == far]
        seeds.append(int(cand.min()))

    owner = {}
    frontiers = [[s] for s in seeds]
    for j, s in enumerate(seeds):
        owner[s] = j
    active = True
    while active:
        active = False
        for j in range(k):
            new_frontier = []
            for f in frontiers[j]:
                for g in nbr[f]:
                    if g in inset and g not in owner:
                        owner[g] = j
                        new_frontier.append(g)
            frontiers[j] = sorted(new_frontier)
            if new_frontier:
                active = True

    groups = [[] for _ in range(k)]
    for f in faces:
        groups[owner[int(f)]].append(int(f))
    pieces = [np.array(sorted(g), dtype=np.int64) for g in groups if g]
    pieces.sort(key=lambda g: int(g[0]))
    return pieces


def _build_cluster_tree(faces: np.ndarray, nbr: List[List[int]],
                        branching: int, depth: int = 0) -> _Cluster:
    node = _Cluster(faces=np.sort(faces), depth=depth)
    if len(faces) > 1:
        for piece in _split_cluster(node.faces, nbr, branching):
            node.children.append(_build_cluster_tree(piece, nbr, branching, depth + 1))
    return node


def agglomerated_hierarchical_star(topology: Topology, branching: int = 4) -> SparseTransform:
    """Hierarchical non-solenoidal transform for unstructured meshes.

    A cluster tree over the dual (face-adjacency) graph substitutes for the
    refinement genealogy: every internal node with children c_1..c_m emits
    m - 1 difference columns

        col_j = gstar(c_j) - (|c_j| / |c_{j+1}|) * gstar(c_{j+1}),

    where gstar(c) sums the star columns of the faces in c.  Level index is
    the tree depth.  Total columns: F - 1 per connected component.
    """
    if not topology.is_genus_zero():
        raise UnsupportedGeometryError(
            "agglomerated star basis requires genus-0 components")
    if branching < 2:
        raise ValueError(f"branching must be >= 2, got {branching}")
    full_star = star_matrix(topology, drop_one=False).matrix
    nbr = _dual_adjacency(topology)
    F = topology.mesh.num_triangles
    face_comp = topology.vertex_components[topology.mesh.triangles[:, 0]]

    cols = []
    levels = []

    def gstar(faces: np.ndarray) -> np.ndarray:
        return np.asarray(full_star[:, faces].sum(axis=1)).ravel()

    def emit(node: _Cluster):
        m = len(node.children)
        if m == 0:
            return
        for j in range(m - 1):
            cj, cn = node.children[j], node.children[j + 1]
            col = gstar(cj.faces) - (len(cj.faces) / len(cn.faces)) * gstar(cn.faces)
            cols.append(col)
            levels.append(node.depth)
        for ch in node.children:
            emit(ch)

    for comp in np.unique(face_comp):
        comp_faces = np.nonzero(face_comp == comp)[0].astype(np.int64)
        root = _build_cluster_tree(comp_faces, nbr, branching)
        emit(root)

    mat = sp.csc_matrix(np.column_stack(cols)) if cols else sp.csc_matrix((full_star.shape[0], 0))
    expected = F - len(np.unique(face_comp))
    if mat.shape[1] != expected:
        raise AssertionError(
            f"agglomeration produced {mat.shape[1]} columns, expected {expected}")
    return SparseTransform(matrix=mat, levels=np.array(levels, dtype=np.int64),
                           kind="h-n-sol")
