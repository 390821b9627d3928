"""Indexed triangle mesh: construction, OBJ I/O, validation, neighborhood queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BOUNDARY = -1


class MeshError(Exception):
    """Invalid mesh data, or an operation applied to an unsuitable mesh."""


@dataclass(frozen=True)
class MeshStats:
    vertex_count: int
    edge_count: int
    face_count: int
    euler_characteristic: int
    genus: int
    is_closed_manifold: bool


def _build_adjacency(faces: np.ndarray) -> np.ndarray:
    """Face adjacency with the convention adj[f, t] = face across the edge
    opposite local vertex t of face f (BOUNDARY if missing or non-manifold).

    Read row-wise, the three neighbors are ordered counterclockwise
    consistently with the face winding.
    """
    adj = np.full(faces.shape, BOUNDARY, dtype=np.int64)
    edge_faces: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for fi in range(len(faces)):
        a, b, c = faces[fi]
        for t, (u, v) in enumerate(((b, c), (c, a), (a, b))):
            key = (u, v) if u < v else (v, u)
            edge_faces.setdefault(key, []).append((fi, t))
    for sides in edge_faces.values():
        if len(sides) == 2:
            (f0, t0), (f1, t1) = sides
            adj[f0, t0] = f1
            adj[f1, t1] = f0
    return adj


class Mesh:
    """Immutable indexed triangle mesh.

    Faces are triples of vertex indices wound counterclockwise when viewed
    from outside. ``adjacency`` follows the opposite-vertex convention of
    :func:`_build_adjacency`, which makes "counterclockwise around a face"
    well defined directly from the stored winding.
    """

    def __init__(self, vertices, faces):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        faces = np.ascontiguousarray(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError(f"faces must be (m, 3), got {faces.shape}")
        if faces.size:
            if faces.min() < 0 or faces.max() >= len(vertices):
                raise MeshError("face vertex index out of range")
            degen = (
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 2] == faces[:, 0])
            )
            if degen.any():
                raise MeshError(f"face {int(np.flatnonzero(degen)[0])} repeats a vertex")
        self.vertices = vertices
        self.faces = faces
        self.adjacency = _build_adjacency(faces)
        for arr in (self.vertices, self.faces, self.adjacency):
            arr.setflags(write=False)
        self._edges: np.ndarray | None = None
        self._vertex_faces: list[list[int]] | None = None

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (E, 2) array, rows sorted lexicographically."""
        if self._edges is None:
            if self.faces.size == 0:
                self._edges = np.zeros((0, 2), dtype=np.int64)
            else:
                e = np.concatenate(
                    [self.faces[:, [1, 2]], self.faces[:, [2, 0]], self.faces[:, [0, 1]]]
                )
                e.sort(axis=1)
                self._edges = np.unique(e, axis=0)
            self._edges.setflags(write=False)
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self.edges())

    def vertex_faces(self) -> list[list[int]]:
        """For each vertex, the incident face indices (arbitrary order)."""
        if self._vertex_faces is None:
            vf: list[list[int]] = [[] for _ in range(self.vertex_count)]
            for fi, f in enumerate(self.faces):
                for v in f:
                    vf[v].append(fi)
            self._vertex_faces = vf
        return self._vertex_faces

    def vertex_valences(self) -> np.ndarray:
        val = np.zeros(self.vertex_count, dtype=np.int64)
        e = self.edges()
        np.add.at(val, e[:, 0], 1)
        np.add.at(val, e[:, 1], 1)
        return val

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.vertex_count == 0:
            raise MeshError("empty mesh has no bounding box")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def link_cycle(self, v: int) -> list[int] | None:
        """Vertices adjacent to v, ordered counterclockwise as seen from outside.

        Returns None if the faces around v do not form a single closed fan.
        """
        vf = self.vertex_faces()[v]
        if not vf:
            return None
        start = vf[0]
        link: list[int] = []
        f = start
        for _ in range(len(vf) + 1):
            row = self.faces[f]
            i = int(np.flatnonzero(row == v)[0])
            link.append(int(row[(i + 1) % 3]))
            f = int(self.adjacency[f, (i + 1) % 3])
            if f == BOUNDARY:
                return None
            if f == start:
                break
        else:
            return None
        if len(link) != len(vf):
            return None
        return link


def validate_closed_manifold(mesh: Mesh) -> MeshStats:
    """Topology report: closed iff every edge has two faces, orientation is
    consistent, and every vertex fan is a single cycle."""
    v_count = mesh.vertex_count
    f_count = mesh.face_count
    e_count = mesh.edge_count
    chi = v_count - e_count + f_count
    closed = f_count > 0

    if closed:
        # Every undirected edge on exactly 2 faces, every directed edge used once.
        directed: set[tuple[int, int]] = set()
        edge_uses: dict[tuple[int, int], int] = {}
        for f in mesh.faces:
            a, b, c = (int(f[0]), int(f[1]), int(f[2]))
            for u, w in ((a, b), (b, c), (c, a)):
                if (u, w) in directed:
                    closed = False
                directed.add((u, w))
                key = (u, w) if u < w else (w, u)
                edge_uses[key] = edge_uses.get(key, 0) + 1
        if closed and any(n != 2 for n in edge_uses.values()):
            closed = False
        if closed and any((w, u) not in directed for (u, w) in directed):
            closed = False

    if closed:
        vf = mesh.vertex_faces()
        for v in range(v_count):
            if not vf[v]:
                closed = False
                break
            if mesh.link_cycle(v) is None:
                closed = False
                break

    genus = (2 - chi) // 2 if closed and (2 - chi) % 2 == 0 and chi <= 2 else 0
    return MeshStats(
        vertex_count=v_count,
        edge_count=e_count,
        face_count=f_count,
        euler_characteristic=chi,
        genus=genus,
        is_closed_manifold=closed,
    )


def face_distance(mesh: Mesh, f: int, g: int) -> int:
    """Shortest-path length between two faces in the face-adjacency graph."""
    n = mesh.face_count
    if not (0 <= f < n and 0 <= g < n):
        raise MeshError(f"face index out of range: {f}, {g}")
    if f == g:
        return 0
    dist = np.full(n, -1, dtype=np.int64)
    dist[f] = 0
    queue = deque([f])
    while queue:
        cur = queue.popleft()
        for nb in mesh.adjacency[cur]:
            if nb != BOUNDARY and dist[nb] < 0:
                dist[nb] = dist[cur] + 1
                if nb == g:
                    return int(dist[nb])
                queue.append(int(nb))
    raise MeshError(f"faces {f} and {g} are not connected")


def k_ring(mesh: Mesh, f: int, k: int) -> set[int]:
    """Faces at face-distance exactly k from f. k = 0 gives {f}."""
    n = mesh.face_count
    if not 0 <= f < n:
        raise MeshError(f"face index out of range: {f}")
    if k < 0:
        raise MeshError("k must be nonnegative")
    seen = {f}
    ring = {f}
    for _ in range(k):
        nxt: set[int] = set()
        for cur in ring:
            for nb in mesh.adjacency[cur]:
                if nb != BOUNDARY and int(nb) not in seen:
                    nxt.add(int(nb))
        seen |= nxt
        ring = nxt
    return ring


def _parse_index(token: str, line_no: int) -> int:
    head = token.split("/")[0]
    try:
        idx = int(head)
    except ValueError as exc:
        raise MeshError(f"line {line_no}: bad face index {token!r}") from exc
    if idx <= 0:
        raise MeshError(f"line {line_no}: face indices must be positive 1-based, got {idx}")
    return idx - 1


def load_obj(path) -> Mesh:
    """Load a triangle mesh from a Wavefront OBJ file.

    Supports ``v x y z`` and ``f i j k`` (1-based); ``i/t/n`` suffixes are
    parsed and ignored. Non-triangle faces are rejected.
    """
    path = Path(path)
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            key = parts[0]
            if key == "v":
                if len(parts) < 4:
                    raise MeshError(f"line {line_no}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshError(f"line {line_no}: bad vertex coordinate") from exc
            elif key == "f":
                if len(parts) != 4:
                    raise MeshError(f"line {line_no}: non-triangle face ({len(parts) - 1} vertices)")
                faces.append([_parse_index(tok, line_no) for tok in parts[1:]])
            # vt/vn/usemtl/mtllib/o/g/s are skipped.
    if not faces:
        raise MeshError(f"{path}: no faces found")
    vert_arr = np.asarray(vertices, dtype=np.float64)
    face_arr = np.asarray(faces, dtype=np.int64)
    if face_arr.max() >= len(vert_arr):
        raise MeshError(f"{path}: face index out of range")
    return Mesh(vert_arr, face_arr)


def save_obj(mesh: Mesh, path, face_colors=None) -> None:
    """Write a mesh as OBJ with 9 significant digits per coordinate.

    ``face_colors`` is an optional (F, 3) array of RGB values in [0, 1];
    distinct colors become materials in a sibling .mtl file and faces are
    grouped with ``usemtl`` directives.
    """
    if mesh.face_count == 0:
        raise MeshError("refusing to save a mesh with no faces")
    path = Path(path)
    mtl_names: list[str] = []
    color_of_face = None
    if face_colors is not None:
        face_colors = np.asarray(face_colors, dtype=np.float64)
        if face_colors.shape != (mesh.face_count, 3):
            raise MeshError(f"face_colors must be ({mesh.face_count}, 3)")
        palette: dict[tuple[float, float, float], str] = {}
        color_of_face = []
        for row in face_colors:
            key = (float(row[0]), float(row[1]), float(row[2]))
            if key not in palette:
                palette[key] = f"mat{len(palette)}"
            color_of_face.append(palette[key])
        mtl_path = path.with_suffix(".mtl")
        with open(mtl_path, "w", encoding="utf-8") as fh:
            for color, name in palette.items():
                fh.write(f"newmtl {name}\n")
                fh.write(f"Kd {color[0]:.9g} {color[1]:.9g} {color[2]:.9g}\n")
        mtl_names.append(mtl_path.name)

    with open(path, "w", encoding="utf-8") as fh:
        for name in mtl_names:
            fh.write(f"mtllib {name}\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        current = None
        for fi, f in enumerate(mesh.faces):
            if color_of_face is not None and color_of_face[fi] != current:
                current = color_of_face[fi]
                fh.write(f"usemtl {current}\n")
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
