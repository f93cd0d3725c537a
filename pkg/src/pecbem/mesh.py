"""Closed triangulated surfaces and their edge topology.

Meshes are immutable after construction: vertex and triangle arrays are
marked read-only, so concurrent readers are safe.  Only closed, consistently
oriented 2-manifolds are accepted downstream; open surfaces are rejected by
`build_topology`.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .errors import MeshError, TopologyError, UnsupportedGeometryError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SurfaceMesh:
    """Triangulated surface in meters.

    Attributes
    ----------
    vertices : (V, 3) float array
    triangles : (F, 3) int array
        Ordered vertex-index triples; a consistent ordering induces the
        outward normal via the right-hand rule.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = _frozen(np.asarray(self.vertices, dtype=np.float64))
        t = _frozen(np.asarray(self.triangles, dtype=np.int64))
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must be (V, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError(f"triangles must be (F, 3), got {t.shape}")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshError("triangle vertex index out of range")
        if np.any(t[:, 0] == t[:, 1]) or np.any(t[:, 1] == t[:, 2]) or np.any(t[:, 0] == t[:, 2]):
            raise MeshError("triangle with repeated vertex")
        if np.any(self.areas() <= 0.0):
            raise MeshError("degenerate triangle (zero area)")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def corners(self) -> np.ndarray:
        """(F, 3, 3) vertex coordinates of each triangle."""
        return self.vertices[self.triangles]

    def areas(self) -> np.ndarray:
        c = self.vertices[self.triangles]
        n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        return 0.5 * np.linalg.norm(n, axis=1)

    def normals(self) -> np.ndarray:
        """Unit normals from the stored vertex order (outward for valid meshes)."""
        c = self.vertices[self.triangles]
        n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        return n / np.linalg.norm(n, axis=1)[:, None]

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(self.vertices.tobytes())
        h.update(self.triangles.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class Topology:
    """Edge table and incidence data of a closed oriented mesh.

    Edges are stored as (min, max) vertex pairs in lexicographic order, which
    fixes the edge numbering and the plus/minus triangle assignment: the plus
    triangle of an edge is the one whose boundary traverses the edge in stored
    vertex order.
    """

    mesh: SurfaceMesh
    edges: np.ndarray            # (E, 2) int, each row sorted, rows lexsorted
    edge_tri_plus: np.ndarray    # (E,) triangle traversing the edge as stored
    edge_tri_minus: np.ndarray   # (E,) the other triangle
    vertex_components: np.ndarray  # (V,) component label per vertex
    component_euler: np.ndarray    # (n_components,) V - E + F per component

    # derived adjacency, built lazily in build_topology
    vertex_edges: Tuple[Tuple[int, ...], ...] = field(repr=False, default=())
    vertex_triangles: Tuple[Tuple[int, ...], ...] = field(repr=False, default=())
    tri_edges: np.ndarray = field(repr=False, default=None)   # (F, 3): edge opposite local vertex i
    tri_edge_sign: np.ndarray = field(repr=False, default=None)  # (F, 3): +1 if plus triangle

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_components(self) -> int:
        return len(self.component_euler)

    @property
    def euler_characteristic(self) -> int:
        return int(self.component_euler.sum())

    def genus(self) -> np.ndarray:
        """Per-component genus (closed orientable: V - E + F = 2 - 2g)."""
        return (2 - self.component_euler) // 2

    def is_genus_zero(self) -> bool:
        return bool(np.all(self.component_euler == 2))


def _edge_key(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a < b else (b, a)


def build_topology(mesh: SurfaceMesh) -> Topology:
    """Build the edge table of a closed, consistently oriented mesh.

    Raises
    ------
    TopologyError
        If an edge is shared by a number of triangles other than two
        (the offending vertex pair is named), or if the two incident
        triangles traverse the edge in the same direction.
    UnsupportedGeometryError
        If the surface has a boundary edge (open surfaces unsupported).
    """
    tris = mesh.triangles
    incident: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for f, (a, b, c) in enumerate(tris):
        for (u, v) in ((a, b), (b, c), (c, a)):
            incident.setdefault(_edge_key(int(u), int(v)), []).append((f, int(u)))
    for key, tri_list in incident.items():
        if len(tri_list) == 1:
            raise UnsupportedGeometryError(
                f"boundary edge {key}: closed surfaces only")
        if len(tri_list) != 2:
            raise TopologyError(
                f"non-manifold edge {key}: {len(tri_list)} incident triangles")

    keys = sorted(incident.keys())
    E = len(keys)
    edges = np.array(keys, dtype=np.int64).reshape(E, 2)
    plus = np.full(E, -1, dtype=np.int64)
    minus = np.full(E, -1, dtype=np.int64)
    for e, key in enumerate(keys):
        (f0, first0), (f1, first1) = incident[key]
        fwd0 = first0 == key[0]
        fwd1 = first1 == key[0]
        if fwd0 == fwd1:
            raise TopologyError(
                f"inconsistent orientation across edge {key}")
        plus[e] = f0 if fwd0 else f1
        minus[e] = f1 if fwd0 else f0

    # connected components over vertices (via edges)
    V = mesh.num_vertices
    parent = np.arange(V)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    roots = np.array([find(i) for i in range(V)])
    _, labels = np.unique(roots, return_inverse=True)
    n_comp = labels.max() + 1 if V else 0

    comp_V = np.bincount(labels, minlength=n_comp)
    comp_E = np.bincount(labels[edges[:, 0]], minlength=n_comp)
    comp_F = np.bincount(labels[tris[:, 0]], minlength=n_comp)
    euler = comp_V - comp_E + comp_F

    # adjacency
    v_edges: List[List[int]] = [[] for _ in range(V)]
    for e, (a, b) in enumerate(edges):
        v_edges[a].append(e)
        v_edges[b].append(e)
    v_tris: List[List[int]] = [[] for _ in range(V)]
    for f, (a, b, c) in enumerate(tris):
        v_tris[a].append(f)
        v_tris[b].append(f)
        v_tris[c].append(f)

    # per-triangle edge table: tri_edges[f, i] = edge opposite local vertex i
    lookup = {key: e for e, key in enumerate(keys)}
    F = len(tris)
    tri_edges = np.empty((F, 3), dtype=np.int64)
    tri_sign = np.empty((F, 3), dtype=np.int64)
    for f, (a, b, c) in enumerate(tris):
        loc = (int(a), int(b), int(c))
        for i in range(3):
            u, v = loc[(i + 1) % 3], loc[(i + 2) % 3]
            e = lookup[_edge_key(u, v)]
            tri_edges[f, i] = e
            tri_sign[f, i] = 1 if plus[e] == f else -1

    return Topology(
        mesh=mesh,
        edges=_frozen(edges),
        edge_tri_plus=_frozen(plus),
        edge_tri_minus=_frozen(minus),
        vertex_components=_frozen(labels.astype(np.int64)),
        component_euler=_frozen(euler.astype(np.int64)),
        vertex_edges=tuple(tuple(x) for x in v_edges),
        vertex_triangles=tuple(tuple(x) for x in v_tris),
        tri_edges=_frozen(tri_edges),
        tri_edge_sign=_frozen(tri_sign),
    )


def generate_cube_mesh(side: float, n: int) -> SurfaceMesh:
    """Axis-aligned cube of the given side length, n subdivisions per edge.

    The surface carries 12*n^2 triangles, consistently oriented outward.
    Vertices sit on the integer lattice scaled by side/n, so repeated calls
    are bit-for-bit reproducible.
    """
    if side <= 0:
        raise MeshError(f"side must be positive, got {side}")
    if n < 1:
        raise MeshError(f"n must be >= 1, got {n}")

    key_to_id: Dict[Tuple[int, int, int], int] = {}
    verts: List[Tuple[int, int, int]] = []

    def vid(key):
        if key not in key_to_id:
            key_to_id[key] = len(verts)
            verts.append(key)
        return key_to_id[key]

    tris: List[Tuple[int, int, int]] = []
    # faces: (fixed axis, fixed value, u axis, v axis); orientation chosen so
    # that (eu x ev) points outward
    faces = [
        (2, 0, 1, 0),  # z = 0, outward -z: (ey x ex) = -z
        (2, n, 0, 1),  # z = n, outward +z
        (1, 0, 0, 2),  # y = 0, outward -y: (ex x ez) = -y
        (1, n, 2, 0),  # y = n, outward +y
        (0, 0, 2, 1),  # x = 0, outward -x: (ez x ey) = -x
        (0, n, 1, 2),  # x = n, outward +x
    ]
    for axis, value, ua, va in faces:
        def point(iu, iv):
            p = [0, 0, 0]
            p[axis] = value
            p[ua] = iu
            p[va] = iv
            return vid(tuple(p))

        for iu in range(n):
            for iv in range(n):
                p00 = point(iu, iv)
                p10 = point(iu + 1, iv)
                p01 = point(iu, iv + 1)
                p11 = point(iu + 1, iv + 1)
                tris.append((p00, p10, p11))
                tris.append((p00, p11, p01))

    vertices = np.array(verts, dtype=np.float64) * (side / n)
    return SurfaceMesh(vertices=vertices, triangles=np.array(tris, dtype=np.int64))


def generate_tetrahedron() -> SurfaceMesh:
    """Unit right tetrahedron with vertices at the origin and unit axes."""
    vertices = np.array([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    # outward orientation
    triangles = np.array([
        [0, 2, 1],
        [0, 1, 3],
        [0, 3, 2],
        [1, 2, 3],
    ], dtype=np.int64)
    return SurfaceMesh(vertices=vertices, triangles=triangles)


@dataclass(frozen=True)
class MeshStats:
    V: int
    E: int
    F: int
    euler: int
    h_avg: float
    h_min: float
    total_area: float

    CSV_HEADER = "V,E,F,euler,h_avg,h_min,area"

    def as_csv_row(self) -> str:
        return (f"{self.V},{self.E},{self.F},{self.euler},"
                f"{self.h_avg:.12g},{self.h_min:.12g},{self.total_area:.12g}")


def mesh_statistics(mesh: SurfaceMesh, topology: Topology | None = None) -> MeshStats:
    """Counts, Euler characteristic, edge-length statistics, and total area."""
    topo = topology if topology is not None else build_topology(mesh)
    ev = mesh.vertices[topo.edges]
    lengths = np.linalg.norm(ev[:, 1] - ev[:, 0], axis=1)
    return MeshStats(
        V=mesh.num_vertices,
        E=topo.num_edges,
        F=mesh.num_triangles,
        euler=topo.euler_characteristic,
        h_avg=float(lengths.mean()),
        h_min=float(lengths.min()),
        total_area=float(mesh.areas().sum()),
    )
