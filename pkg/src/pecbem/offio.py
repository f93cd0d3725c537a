"""ASCII OFF reader/writer for closed triangle meshes.

The reader repairs face orientation to a consistent outward convention when
possible (breadth-first propagation per component, then a signed-volume flip),
so unstructured meshes from external tools can be ingested directly.
"""

from typing import List, Union

import numpy as np

from .errors import OffParseError, TopologyError
from .mesh import SurfaceMesh


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def read_off(payload: Union[bytes, str]) -> SurfaceMesh:
    """Parse an ASCII OFF payload into a consistently oriented SurfaceMesh.

    Raises
    ------
    OffParseError
        Unreadable header, counts, or malformed records.
    TopologyError
        Non-manifold connectivity (an edge used by more than two faces),
        naming the offending edge.
    """
    if isinstance(payload, bytes):
        try:
            text = payload.decode("ascii")
        except UnicodeDecodeError as exc:
            raise OffParseError(f"OFF payload is not ASCII: {exc}") from None
    else:
        text = payload

    it = _tokens(text)
    try:
        lineno, tok = next(it)
    except StopIteration:
        raise OffParseError("empty OFF payload") from None
    if tok[0].upper() != "OFF":
        raise OffParseError(f"line {lineno}: expected 'OFF' header, got {tok[0]!r}")
    # counts may share the header line ("OFF V F E") or follow it
    if len(tok) >= 4:
        counts = tok[1:4]
    else:
        try:
            lineno, counts = next(it)
        except StopIteration:
            raise OffParseError("missing vertex/face counts") from None
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except (ValueError, IndexError):
        raise OffParseError(f"line {lineno}: bad count line {counts!r}") from None
    if nv <= 0 or nf <= 0:
        raise OffParseError(f"line {lineno}: nonpositive counts {counts!r}")

    verts = np.empty((nv, 3), dtype=np.float64)
    for i in range(nv):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise OffParseError(f"expected {nv} vertices, found {i}") from None
        if len(tok) < 3:
            raise OffParseError(f"line {lineno}: vertex needs 3 coordinates")
        try:
            verts[i] = [float(x) for x in tok[:3]]
        except ValueError:
            raise OffParseError(f"line {lineno}: bad vertex coordinates") from None

    faces: List[List[int]] = []
    for i in range(nf):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise OffParseError(f"expected {nf} faces, found {i}") from None
        try:
            arity = int(tok[0])
            idx = [int(x) for x in tok[1:1 + arity]]
        except (ValueError, IndexError):
            raise OffParseError(f"line {lineno}: bad face record") from None
        if arity != 3:
            raise OffParseError(f"line {lineno}: only triangles supported, got {arity}-gon")
        if len(idx) != 3:
            raise OffParseError(f"line {lineno}: face record truncated")
        faces.append(idx)

    tris = np.array(faces, dtype=np.int64)
    if tris.min() < 0 or tris.max() >= nv:
        raise OffParseError("face vertex index out of range")
    tris = _repair_orientation(verts, tris)
    return SurfaceMesh(vertices=verts, triangles=tris)


def _repair_orientation(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Flip faces until every shared edge is traversed in opposite directions,
    then orient each component outward (positive enclosed volume)."""
    nf = len(tris)
    edge_faces = {}
    for f, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            edge_faces.setdefault(key, []).append(f)
    for key, fs in edge_faces.items():
        if len(fs) > 2:
            raise TopologyError(f"non-manifold edge {key}: {len(fs)} incident triangles")

    out = tris.copy()
    seen = np.zeros(nf, dtype=bool)
    comp_label = np.full(nf, -1, dtype=np.int64)
    n_comp = 0
    for seed in range(nf):
        if seen[seed]:
            continue
        comp = n_comp
        n_comp += 1
        stack = [seed]
        seen[seed] = True
        comp_label[seed] = comp
        while stack:
            f = stack.pop()
            a, b, c = out[f]
            for u, v in ((a, b), (b, c), (c, a)):
                key = (int(u), int(v)) if u < v else (int(v), int(u))
                for g in edge_faces[key]:
                    if g == f or seen[g]:
                        continue
                    # neighbor must traverse (u, v) in the opposite direction
                    ga, gb, gc = out[g]
                    g_dirs = ((ga, gb), (gb, gc), (gc, ga))
                    if (int(u), int(v)) in tuple(map(lambda p: (int(p[0]), int(p[1])), g_dirs)):
                        out[g] = out[g, ::-1]
                    seen[g] = True
                    comp_label[g] = comp
                    stack.append(g)

    # orient each component outward: signed volume sum det(v0, v1, v2)/6 > 0
    for comp in range(n_comp):
        mask = comp_label == comp
        c = verts[out[mask]]
        vol = np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0
        if vol < 0:
            out[mask] = out[mask][:, ::-1]
    return out


def write_off(mesh: SurfaceMesh) -> str:
    """Serialize to ASCII OFF with 17 significant digits (lossless round trip)."""
    lines = ["OFF", f"{mesh.num_vertices} {mesh.num_triangles} 0"]
    for x, y, z in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    return "\n".join(lines) + "\n"
