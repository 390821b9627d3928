"""Mesh pyramids: 1-to-4 face splits, split detection, pooling and upsampling."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from subdivnet.mesh import BOUNDARY, Mesh, MeshError, load_obj, save_obj, validate_closed_manifold

FORMAT_VERSION = 1


@dataclass(frozen=True)
class FaceMap:
    """4-to-1 face correspondence between a fine mesh and the next coarser one.

    ``children[p]`` lists the four fine faces of coarse face p: the three
    corner triangles in coarse-vertex order, then the central triangle.
    """

    parent_of: np.ndarray  # (F_fine,) coarse face index per fine face
    central_child: np.ndarray  # (F_coarse,) fine index of each middle child
    children: np.ndarray  # (F_coarse, 4)

    def __post_init__(self):
        for arr in (self.parent_of, self.central_child, self.children):
            arr.setflags(write=False)

    @property
    def coarse_count(self) -> int:
        return len(self.central_child)

    @property
    def fine_count(self) -> int:
        return len(self.parent_of)


@dataclass
class MeshPyramid:
    """Mesh sequence from base (levels[0]) to finest, with 4-to-1 maps.

    ``face_maps[i]`` relates levels[i] (coarse) and levels[i + 1] (fine).
    """

    levels: list[Mesh]
    face_maps: list[FaceMap]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def base_size(self) -> int:
        return self.levels[0].face_count

    def __post_init__(self):
        if len(self.face_maps) != len(self.levels) - 1:
            raise MeshError("pyramid needs one face map per refinement step")


def _edge_index(mesh: Mesh) -> dict[tuple[int, int], int]:
    return {(int(a), int(b)): i for i, (a, b) in enumerate(mesh.edges())}


def loop_split(mesh: Mesh) -> tuple[Mesh, FaceMap]:
    """Split every face into four; one midpoint vertex per edge, no smoothing.

    The coarse vertices stay first in the fine vertex array, followed by
    midpoints in sorted-edge order. Children of face (A, B, C) are
    (A, mAB, mCA), (B, mBC, mAB), (C, mCA, mBC), and the central
    (mAB, mBC, mCA).
    """
    stats = validate_closed_manifold(mesh)
    if not stats.is_closed_manifold:
        raise MeshError("loop_split requires a closed 2-manifold")
    edges = mesh.edges()
    eidx = _edge_index(mesh)
    nv = mesh.vertex_count
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    fine_vertices = np.concatenate([mesh.vertices, midpoints], axis=0)

    def mid(u: int, v: int) -> int:
        return nv + eidx[(u, v) if u < v else (v, u)]

    nf = mesh.face_count
    fine_faces = np.empty((4 * nf, 3), dtype=np.int64)
    for p, (a, b, c) in enumerate(mesh.faces):
        a, b, c = int(a), int(b), int(c)
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        fine_faces[4 * p + 0] = (a, mab, mca)
        fine_faces[4 * p + 1] = (b, mbc, mab)
        fine_faces[4 * p + 2] = (c, mca, mbc)
        fine_faces[4 * p + 3] = (mab, mbc, mca)

    parent_of = np.repeat(np.arange(nf, dtype=np.int64), 4)
    children = np.arange(4 * nf, dtype=np.int64).reshape(nf, 4)
    fmap = FaceMap(parent_of=parent_of, central_child=children[:, 3].copy(), children=children)
    return Mesh(fine_vertices, fine_faces), fmap


def loop_beta(n: int) -> float:
    """Vertex-update weight for valence n."""
    c = 3.0 / 8.0 + 0.25 * np.cos(2.0 * np.pi / n)
    return (5.0 / 8.0 - c * c) / n


def loop_smooth(coarse: Mesh, fine_topology: Mesh) -> Mesh:
    """Apply the classic subdivision vertex update to a freshly split mesh.

    Edge vertices get 3/8 of each endpoint plus 1/8 of the two opposite
    vertices; original vertices are re-weighted with loop_beta of their
    valence.
    """
    expected, _ = loop_split(coarse)
    if expected.face_count != fine_topology.face_count or not np.array_equal(
        expected.faces, fine_topology.faces
    ):
        raise MeshError("fine mesh is not the split of the given coarse mesh")

    nv = coarse.vertex_count
    edges = coarse.edges()
    new_vertices = fine_topology.vertices.copy()

    # Opposite vertices per edge come from the two incident faces.
    opposite: dict[tuple[int, int], list[int]] = {}
    for a, b, c in coarse.faces:
        a, b, c = int(a), int(b), int(c)
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            key = (u, v) if u < v else (v, u)
            opposite.setdefault(key, []).append(w)
    for i, (a, b) in enumerate(edges):
        opp = opposite[(int(a), int(b))]
        new_vertices[nv + i] = 0.375 * (coarse.vertices[a] + coarse.vertices[b]) + 0.125 * (
            coarse.vertices[opp[0]] + coarse.vertices[opp[1]]
        )

    neighbor_sum = np.zeros((nv, 3))
    valence = np.zeros(nv)
    for a, b in edges:
        neighbor_sum[a] += coarse.vertices[b]
        neighbor_sum[b] += coarse.vertices[a]
        valence[a] += 1
        valence[b] += 1
    beta = np.array([loop_beta(int(n)) for n in valence])
    new_vertices[:nv] = (1.0 - valence * beta)[:, None] * coarse.vertices + beta[:, None] * neighbor_sum
    return Mesh(new_vertices, fine_topology.faces)


def _canonical_triple(t) -> tuple[int, int, int]:
    a, b, c = int(t[0]), int(t[1]), int(t[2])
    if a <= b and a <= c:
        return (a, b, c)
    if b <= a and b <= c:
        return (b, c, a)
    return (c, a, b)


def _face_components(mesh: Mesh) -> list[list[int]]:
    seen = np.zeros(mesh.face_count, dtype=bool)
    comps: list[list[int]] = []
    for start in range(mesh.face_count):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            f = stack.pop()
            for g in mesh.adjacency[f]:
                g = int(g)
                if g != BOUNDARY and not seen[g]:
                    seen[g] = True
                    comp.append(g)
                    stack.append(g)
        comps.append(comp)
    return comps


def _propagate_split_labels(mesh: Mesh, seed: int, value: int, state: dict[int, int]) -> bool:
    """Fill ``state`` over the seed's component: -1 central, >= 0 corner with
    that surviving vertex. Returns False on contradiction."""
    adj = mesh.adjacency
    faces = mesh.faces
    queue: list[int] = []

    def assign(f: int, v: int) -> bool:
        if f not in state:
            state[f] = v
            queue.append(f)
            return True
        return state[f] == v

    if not assign(seed, value):
        return False
    while queue:
        f = queue.pop()
        if state[f] == -1:
            for t in range(3):
                g = int(adj[f, t])
                e0, e1 = int(faces[f, (t + 1) % 3]), int(faces[f, (t + 2) % 3])
                others = [int(x) for x in faces[g] if int(x) != e0 and int(x) != e1]
                if len(others) != 1 or not assign(g, others[0]):
                    return False
        else:
            w = state[f]
            row = [int(x) for x in faces[f]]
            if w not in row:
                return False
            i = row.index(w)
            if not assign(int(adj[f, i]), -1):
                return False
            for t in ((i + 1) % 3, (i + 2) % 3):
                if not assign(int(adj[f, t]), w):
                    return False
    return True


def _verify_component_grouping(
    mesh: Mesh, comp: list[int], state: dict[int, int]
) -> list[tuple[int, list[int]]] | None:
    """Check a labeled component against a re-split of its implied coarse faces.

    Returns (central face, its coarse corner vertices in fine ids) per group,
    or None if the labeling is not an actual 1-to-4 split.
    """
    adj = mesh.adjacency
    faces = mesh.faces
    centrals = [f for f in comp if state[f] == -1]
    if 4 * len(centrals) != len(comp):
        return None

    old_set = {state[f] for f in comp if state[f] >= 0}
    mid_ends: dict[int, set[int]] = {}
    for f in comp:
        if state[f] < 0:
            continue
        w = state[f]
        for v in faces[f]:
            v = int(v)
            if v == w:
                continue
            if v in old_set:
                return None
            mid_ends.setdefault(v, set()).add(w)
    if any(len(ends) != 2 for ends in mid_ends.values()):
        return None
    mid_of_edge: dict[tuple[int, int], int] = {}
    for m, ends in mid_ends.items():
        a, b = sorted(ends)
        if (a, b) in mid_of_edge:
            return None
        mid_of_edge[(a, b)] = m

    groups: list[tuple[int, list[int]]] = []
    resplit: set[tuple[int, int, int]] = set()
    for c in centrals:
        corner_old = []
        for t in range(3):
            g = int(adj[c, t])
            if state.get(g, -1) < 0:
                return None
            corner_old.append(state[g])
        if len(set(corner_old)) != 3:
            return None
        va, vb, vc = corner_old
        try:
            mab = mid_of_edge[(va, vb) if va < vb else (vb, va)]
            mbc = mid_of_edge[(vb, vc) if vb < vc else (vc, vb)]
            mca = mid_of_edge[(vc, va) if vc < va else (va, vc)]
        except KeyError:
            return None
        resplit.add(_canonical_triple((va, mab, mca)))
        resplit.add(_canonical_triple((vb, mbc, mab)))
        resplit.add(_canonical_triple((vc, mca, mbc)))
        resplit.add(_canonical_triple((mab, mbc, mca)))
        groups.append((c, corner_old))
    if resplit != {_canonical_triple(faces[f]) for f in comp}:
        return None
    return groups


def detect_subdivision_connectivity(mesh: Mesh) -> FaceMap | None:
    """Recover the 4-to-1 grouping if the mesh is a one-round split.

    Classifies each face as a central triangle or a corner triangle attached
    to a surviving coarse vertex, by constraint propagation from a seed
    hypothesis, and verifies each candidate labeling by re-splitting the
    coarse faces it implies. Returns None when no grouping exists.
    """
    nf = mesh.face_count
    if nf % 4 != 0 or nf < 16:
        return None
    if (nf // 4) % 2 != 0:  # a closed triangle mesh has an even face count
        return None
    if (mesh.adjacency == BOUNDARY).any():
        return None
    faces = mesh.faces

    state: dict[int, int] = {}
    all_groups: list[tuple[int, list[int]]] = []
    for comp in _face_components(mesh):
        if len(comp) % 4 != 0:
            return None
        seed = comp[0]
        candidates = []
        for value in (-1, int(faces[seed, 0]), int(faces[seed, 1]), int(faces[seed, 2])):
            trial: dict[int, int] = {}
            if not _propagate_split_labels(mesh, seed, value, trial):
                continue
            groups = _verify_component_grouping(mesh, comp, trial)
            if groups is not None:
                candidates.append((trial, groups))
        if not candidates:
            return None
        # Regular regions admit several groupings; prefer the one whose
        # surviving vertices have the smallest ids, so meshes built by
        # splitting (midpoints appended last) recover their own grouping.
        found = min(
            candidates,
            key=lambda cand: tuple(sorted((v for v in cand[0].values() if v >= 0), reverse=True)),
        )
        state.update(found[0])
        all_groups.extend(found[1])

    all_groups.sort(key=lambda item: item[0])
    n_coarse = nf // 4
    children = np.empty((n_coarse, 4), dtype=np.int64)
    adj = mesh.adjacency
    for p, (c, _corner_old) in enumerate(all_groups):
        children[p, :3] = adj[c]
        children[p, 3] = c
    parent_of = np.empty(nf, dtype=np.int64)
    for p in range(n_coarse):
        parent_of[children[p]] = p
    fmap = FaceMap(parent_of=parent_of, central_child=children[:, 3].copy(), children=children)

    # The grouping is combinatorially valid; reject it only if the implied
    # coarse mesh is not itself a closed manifold.
    old_ids = sorted({v for v in state.values() if v >= 0})
    relabel = {v: i for i, v in enumerate(old_ids)}
    coarse_faces = np.array(
        [[relabel[w] for w in corner_old] for _, corner_old in all_groups], dtype=np.int64
    )
    try:
        coarse = Mesh(mesh.vertices[np.asarray(old_ids, dtype=np.int64)], coarse_faces)
    except MeshError:
        return None
    if not validate_closed_manifold(coarse).is_closed_manifold:
        return None
    return fmap


def reconstruct_coarse(fine: Mesh, fmap: FaceMap) -> Mesh:
    """Build the coarser mesh implied by a detected or constructed face map.

    Requires the surviving vertices to be a prefix of the fine vertex array.
    """
    corner_verts = np.empty((fmap.coarse_count, 3), dtype=np.int64)
    for p in range(fmap.coarse_count):
        central = int(fmap.central_child[p])
        central_set = {int(v) for v in fine.faces[central]}
        for t in range(3):
            g = fmap.children[p, t]
            others = [int(v) for v in fine.faces[g] if int(v) not in central_set]
            if len(others) != 1:
                raise MeshError("face map children do not form 1-to-4 splits")
            corner_verts[p, t] = others[0]
    n_old = int(corner_verts.max()) + 1
    used = np.unique(corner_verts)
    if len(used) != n_old or used[0] != 0 or used[-1] != n_old - 1:
        raise MeshError("coarse vertices are not a prefix of the fine vertex array")
    return Mesh(fine.vertices[:n_old], corner_verts)


def build_pyramid(mesh: Mesh, depth: int) -> MeshPyramid:
    """Detect `depth` successive splits below `mesh` and assemble the pyramid."""
    if depth < 0:
        raise MeshError("depth must be nonnegative")
    levels = [mesh]
    maps: list[FaceMap] = []
    current = mesh
    for step in range(depth):
        fmap = detect_subdivision_connectivity(current)
        if fmap is None:
            raise MeshError(
                f"no subdivision connectivity at level {depth - step} "
                f"({current.face_count} faces)"
            )
        coarse = reconstruct_coarse(current, fmap)
        levels.append(coarse)
        maps.append(fmap)
        current = coarse
    levels.reverse()
    maps.reverse()
    return MeshPyramid(levels=levels, face_maps=maps)


def _as_2d(features: np.ndarray) -> tuple[np.ndarray, bool]:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        return features[:, None], True
    if features.ndim != 2:
        raise MeshError(f"features must be 1- or 2-dimensional, got shape {features.shape}")
    return features, False


def pool(features: np.ndarray, fmap: FaceMap, mode: str = "max") -> np.ndarray:
    """Reduce each parent's four children to one row, by max or mean."""
    x, squeeze = _as_2d(features)
    if len(x) != fmap.fine_count:
        raise MeshError(f"expected {fmap.fine_count} rows, got {len(x)}")
    grouped = x[fmap.children]  # (P, 4, C)
    if mode == "max":
        out = grouped.max(axis=1)
    elif mode == "mean":
        out = grouped.mean(axis=1)
    else:
        raise MeshError(f"unknown pooling mode {mode!r}")
    return out[:, 0] if squeeze else out


def upsample_nearest(features: np.ndarray, fmap: FaceMap) -> np.ndarray:
    """Copy each parent's row to its four children."""
    x, squeeze = _as_2d(features)
    if len(x) != fmap.coarse_count:
        raise MeshError(f"expected {fmap.coarse_count} rows, got {len(x)}")
    out = x[fmap.parent_of]
    return out[:, 0] if squeeze else out


def bilinear_table(fmap: FaceMap, fine: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Per fine face, three (coarse index, weight) pairs for smooth upsampling.

    The central child copies its parent. A corner child mixes 1/2 of its
    parent with 1/4 of the parents of its two neighbors outside the group.
    """
    if fine.face_count != fmap.fine_count:
        raise MeshError("fine mesh does not match the face map")
    idx = np.zeros((fmap.fine_count, 3), dtype=np.int64)
    w = np.zeros((fmap.fine_count, 3), dtype=np.float64)
    central = fmap.central_child
    idx[central, 0] = np.arange(fmap.coarse_count)
    w[central, 0] = 1.0
    for p in range(fmap.coarse_count):
        c = int(central[p])
        for t in range(3):
            f = int(fmap.children[p, t])
            nbrs = [int(g) for g in fine.adjacency[f] if int(g) != c]
            if len(nbrs) != 2:
                raise MeshError("corner child does not border exactly one sibling")
            idx[f] = (p, int(fmap.parent_of[nbrs[0]]), int(fmap.parent_of[nbrs[1]]))
            w[f] = (0.5, 0.25, 0.25)
    return idx, w


def upsample_bilinear(features: np.ndarray, fmap: FaceMap, fine: Mesh) -> np.ndarray:
    """Distance-weighted upsampling; constant fields are preserved exactly."""
    x, squeeze = _as_2d(features)
    if len(x) != fmap.coarse_count:
        raise MeshError(f"expected {fmap.coarse_count} rows, got {len(x)}")
    idx, w = bilinear_table(fmap, fine)
    out = (x[idx] * w[:, :, None]).sum(axis=1)
    return out[:, 0] if squeeze else out


def save_pyramid(pyramid: MeshPyramid, out_dir) -> None:
    """Write level_i.obj, facemap_i.json for i >= 1, and a pyramid.json manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, mesh in enumerate(pyramid.levels):
        save_obj(mesh, out / f"level_{i}.obj")
    for i, fmap in enumerate(pyramid.face_maps, start=1):
        payload = {
            "parent_of": fmap.parent_of.tolist(),
            "central_child": fmap.central_child.tolist(),
        }
        (out / f"facemap_{i}.json").write_text(json.dumps(payload))
    manifest = {
        "format_version": FORMAT_VERSION,
        "depth": pyramid.depth,
        "base_size": pyramid.base_size,
    }
    (out / "pyramid.json").write_text(json.dumps(manifest, indent=2))


def _children_from_parent_of(
    parent_of: np.ndarray, central_child: np.ndarray, fine: Mesh, coarse: Mesh
) -> np.ndarray:
    """Rebuild ordered children; corner order follows coarse-vertex order."""
    n_coarse = len(central_child)
    children = np.full((n_coarse, 4), -1, dtype=np.int64)
    children[:, 3] = central_child
    buckets: list[list[int]] = [[] for _ in range(n_coarse)]
    for f, p in enumerate(parent_of):
        if f != central_child[p]:
            buckets[p].append(f)
    for p in range(n_coarse):
        if len(buckets[p]) != 3:
            raise MeshError("face map does not give 4 children per parent")
        central_set = {int(v) for v in fine.faces[int(central_child[p])]}
        coarse_row = [int(v) for v in coarse.faces[p]]
        for g in buckets[p]:
            others = [int(v) for v in fine.faces[g] if int(v) not in central_set]
            if len(others) != 1 or others[0] not in coarse_row:
                raise MeshError("face map children are inconsistent with the meshes")
            children[p, coarse_row.index(others[0])] = g
    if (children < 0).any():
        raise MeshError("incomplete children table")
    return children


def load_pyramid(in_dir) -> MeshPyramid:
    src = Path(in_dir)
    manifest = json.loads((src / "pyramid.json").read_text())
    if manifest.get("format_version") != FORMAT_VERSION:
        raise MeshError(f"unsupported pyramid format: {manifest.get('format_version')}")
    depth = int(manifest["depth"])
    levels = [load_obj(src / f"level_{i}.obj") for i in range(depth + 1)]
    maps = []
    for i in range(1, depth + 1):
        payload = json.loads((src / f"facemap_{i}.json").read_text())
        parent_of = np.asarray(payload["parent_of"], dtype=np.int64)
        central_child = np.asarray(payload["central_child"], dtype=np.int64)
        children = _children_from_parent_of(parent_of, central_child, levels[i], levels[i - 1])
        maps.append(FaceMap(parent_of=parent_of, central_child=central_child, children=children))
    return MeshPyramid(levels=levels, face_maps=maps)
