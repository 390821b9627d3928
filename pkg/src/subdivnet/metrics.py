"""Geometric measurements: surface sampling, point-to-mesh distance, Hausdorff."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from subdivnet.mesh import Mesh


def face_centroids(mesh: Mesh) -> np.ndarray:
    return mesh.vertices[mesh.faces].mean(axis=1)


def face_areas(mesh: Mesh) -> np.ndarray:
    tri = mesh.vertices[mesh.faces]
    return 0.5 * np.linalg.norm(
        np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1
    )


def sample_surface(mesh: Mesh, n: int, seed: int = 0) -> np.ndarray:
    """Uniform-by-area random points on the surface."""
    rng = np.random.default_rng(seed)
    areas = face_areas(mesh)
    total = areas.sum()
    if total <= 0:
        raise ValueError("mesh has no area to sample")
    faces = rng.choice(mesh.face_count, size=n, p=areas / total)
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tri = mesh.vertices[mesh.faces[faces]]
    return tri[:, 0] + u[:, None] * (tri[:, 1] - tri[:, 0]) + v[:, None] * (tri[:, 2] - tri[:, 0])


def closest_point_on_triangles(
    p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> np.ndarray:
    """Closest point of each triangle (a[i], b[i], c[i]) to each point p[i]."""
    ab = b - a
    ac = c - a
    ap = p - a

    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    out = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    def settle(mask, value):
        fresh = mask & ~done
        out[fresh] = value[fresh]
        done[fresh] = True

    settle((d1 <= 0) & (d2 <= 0), a)
    settle((d3 >= 0) & (d4 <= d3), b)
    settle((d6 >= 0) & (d5 <= d6), c)

    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
    settle((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + np.clip(v_ab, 0, 1)[:, None] * ab)

    vb = d5 * d2 - d1 * d6
    with np.errstate(divide="ignore", invalid="ignore"):
        w_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
    settle((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + np.clip(w_ac, 0, 1)[:, None] * ac)

    va = d3 * d6 - d5 * d4
    denom_bc = (d4 - d3) + (d5 - d6)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bc = np.where(denom_bc != 0, (d4 - d3) / denom_bc, 0.0)
    settle(
        (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0),
        b + np.clip(w_bc, 0, 1)[:, None] * (c - b),
    )

    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(denom != 0, vb / denom, 1.0 / 3.0)
        w = np.where(denom != 0, vc / denom, 1.0 / 3.0)
    settle(np.ones(len(p), dtype=bool), a + v[:, None] * ab + w[:, None] * ac)
    return out


def nearest_faces(points: np.ndarray, mesh: Mesh, k: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Nearest mesh face (by true point-to-triangle distance) per query point.

    Candidates come from the k nearest face centroids, refined exactly.
    Returns (face indices, distances).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    k = min(k, mesh.face_count)
    tree = cKDTree(face_centroids(mesh))
    _, cand = tree.query(points, k=k)
    if k == 1:
        cand = cand[:, None]
    tri = mesh.vertices[mesh.faces]
    best_d = np.full(len(points), np.inf)
    best_f = np.zeros(len(points), dtype=np.int64)
    for col in range(cand.shape[1]):
        faces = cand[:, col]
        closest = closest_point_on_triangles(
            points, tri[faces, 0], tri[faces, 1], tri[faces, 2]
        )
        d = np.linalg.norm(points - closest, axis=1)
        better = d < best_d
        best_d[better] = d[better]
        best_f[better] = faces[better]
    return best_f, best_d


def sampled_hausdorff(mesh_a: Mesh, mesh_b: Mesh, n: int = 10000, seed: int = 0) -> float:
    """Symmetric Hausdorff distance estimated from n surface samples per side."""
    pa = sample_surface(mesh_a, n, seed)
    pb = sample_surface(mesh_b, n, seed + 1)
    _, da = nearest_faces(pa, mesh_b)
    _, db = nearest_faces(pb, mesh_a)
    return float(max(da.max(), db.max()))
