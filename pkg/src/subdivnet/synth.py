"""Synthetic closed-manifold test shapes: spheres, boxes, tori, labeled spheres."""

from __future__ import annotations

import numpy as np

from subdivnet.hierarchy import loop_split
from subdivnet.mesh import Mesh


def tetrahedron() -> Mesh:
    vertices = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    faces = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return Mesh(vertices, faces)


def octahedron() -> Mesh:
    vertices = np.array(
        [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ]
    )
    faces = np.array(
        [
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ]
    )
    return Mesh(vertices, faces)


def icosahedron() -> Mesh:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = np.array(
        [
            [-1, phi, 0],
            [1, phi, 0],
            [-1, -phi, 0],
            [1, -phi, 0],
            [0, -1, phi],
            [0, 1, phi],
            [0, -1, -phi],
            [0, 1, -phi],
            [phi, 0, -1],
            [phi, 0, 1],
            [-phi, 0, -1],
            [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    vertices /= np.linalg.norm(vertices[0])
    faces = np.array(
        [
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ]
    )
    return Mesh(vertices, faces)


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> Mesh:
    """Sphere built by splitting an icosahedron and reprojecting to the sphere."""
    mesh = icosahedron()
    for _ in range(subdivisions):
        mesh, _ = loop_split(mesh)
        verts = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
        mesh = Mesh(verts, mesh.faces)
    return Mesh(mesh.vertices * radius, mesh.faces)


def box(subdivisions: int = 2, extents=(1.0, 1.0, 1.0)) -> Mesh:
    """Axis-aligned box with each quad face triangulated, then refined."""
    ex, ey, ez = extents
    corners = np.array(
        [
            [0, 0, 0],
            [1, 0, 0],
            [1, 1, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 0, 1],
            [1, 1, 1],
            [0, 1, 1],
        ],
        dtype=np.float64,
    )
    corners = (corners - 0.5) * np.array([ex, ey, ez])
    quads = [
        (0, 3, 2, 1),  # bottom, outward -z
        (4, 5, 6, 7),  # top
        (0, 1, 5, 4),  # front
        (1, 2, 6, 5),  # right
        (2, 3, 7, 6),  # back
        (3, 0, 4, 7),  # left
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append([a, b, c])
        faces.append([a, c, d])
    mesh = Mesh(corners, np.asarray(faces))
    for _ in range(subdivisions):
        mesh, _ = loop_split(mesh)
    return mesh


def torus(
    major_segments: int = 12,
    minor_segments: int = 8,
    major_radius: float = 1.0,
    minor_radius: float = 0.35,
) -> Mesh:
    """Triangulated torus of revolution; closed, genus 1."""
    nu, nv = major_segments, minor_segments
    vertices = np.empty((nu * nv, 3))
    for i in range(nu):
        u = 2.0 * np.pi * i / nu
        for j in range(nv):
            v = 2.0 * np.pi * j / nv
            r = major_radius + minor_radius * np.cos(v)
            vertices[i * nv + j] = (r * np.cos(u), r * np.sin(u), minor_radius * np.sin(v))
    faces = []
    for i in range(nu):
        for j in range(nv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            faces.append([a, b, c])
            faces.append([a, c, d])
    return Mesh(vertices, np.asarray(faces))


def minimal_torus() -> Mesh:
    """7-vertex triangulation of the torus; its vertex graph is complete."""
    faces = np.array([[i, (i + 1) % 7, (i + 3) % 7] for i in range(7)] +
                     [[i, (i + 3) % 7, (i + 2) % 7] for i in range(7)])
    angles = 2.0 * np.pi * np.arange(7) / 7.0
    ring = np.stack([np.cos(angles), np.sin(angles), 0.2 * np.sin(3 * angles)], axis=1)
    return Mesh(ring, faces)


def bumpy(mesh: Mesh, amplitude: float, rng: np.random.Generator) -> Mesh:
    """Smooth low-frequency radial deformation around the centroid."""
    center = mesh.vertices.mean(axis=0)
    p = mesh.vertices - center
    freq = rng.uniform(1.0, 2.5, size=3)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=3)
    bump = (
        np.sin(freq[0] * p[:, 0] + phase[0])
        + np.sin(freq[1] * p[:, 1] + phase[1])
        + np.sin(freq[2] * p[:, 2] + phase[2])
    )
    scale = 1.0 + amplitude * bump / 3.0
    return Mesh(center + p * scale[:, None], mesh.faces)


def random_shape(kind: str, rng: np.random.Generator, deform: float = 0.12) -> Mesh:
    """One deformed instance of a shape family; used by the bundled datasets."""
    if kind == "sphere":
        mesh = icosphere(2, radius=1.0)
    elif kind == "box":
        ext = rng.uniform(0.6, 1.4, size=3)
        mesh = box(2, extents=tuple(ext))
    elif kind == "torus":
        minor = rng.uniform(0.2, 0.45)
        mesh = torus(12, 8, major_radius=1.0, minor_radius=float(minor))
    else:
        raise ValueError(f"unknown shape kind {kind!r}")
    stretch = rng.uniform(0.8, 1.25, size=3)
    mesh = Mesh(mesh.vertices * stretch, mesh.faces)
    return bumpy(mesh, deform, rng)


def hemisphere_labels(mesh: Mesh) -> np.ndarray:
    """Binary per-face labels split by the z = 0 plane through the centroid."""
    centroids = mesh.vertices[mesh.faces].mean(axis=1)
    mid = 0.5 * (mesh.vertices[:, 2].min() + mesh.vertices[:, 2].max())
    return (centroids[:, 2] > mid).astype(np.int64)
