"""Planar geometry for local parameterization: flattening, triangulation, clipping."""

from __future__ import annotations

import numpy as np


def orient2d(a, b, c) -> float:
    """Twice the signed area of triangle (a, b, c); positive if counterclockwise."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def polygon_area(points: np.ndarray) -> float:
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def barycentric_2d(tri: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of 2D points with respect to triangle rows.

    tri is (3, 2); points is (n, 2) or (2,). Relies on the triangle having
    nonzero signed area.
    """
    points = np.atleast_2d(points)
    a, b, c = tri
    m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    rhs = points - a
    l1 = (m[1, 1] * rhs[:, 0] - m[0, 1] * rhs[:, 1]) / det
    l2 = (-m[1, 0] * rhs[:, 0] + m[0, 0] * rhs[:, 1]) / det
    out = np.stack([1.0 - l1 - l2, l1, l2], axis=1)
    return out[0] if out.shape[0] == 1 and points.shape[0] == 1 else out


def clamp_barycentric(bary: np.ndarray) -> np.ndarray:
    """Snap tiny negatives to zero and renormalize to sum exactly 1."""
    out = np.clip(bary, 0.0, None)
    s = out.sum(axis=-1, keepdims=True)
    return out / s


def conformal_flatten(center: np.ndarray, ring: np.ndarray) -> np.ndarray | None:
    """Flatten a vertex star to the plane with the angle-scaling exponent map.

    Interior angles at the center are scaled so they total 2*pi and radii are
    raised to the same exponent. Returns the (m, 2) ring image (center maps
    to the origin), or None when the star cannot be flattened without a
    fold-over (a scaled wedge reaching pi, or a degenerate edge).
    """
    m = len(ring)
    rel = ring - center
    radii = np.linalg.norm(rel, axis=1)
    if (radii <= 0.0).any():
        return None
    angles = np.empty(m)
    for i in range(m):
        u = rel[i] / radii[i]
        v = rel[(i + 1) % m] / radii[(i + 1) % m]
        angles[i] = np.arccos(np.clip(np.dot(u, v), -1.0, 1.0))
    total = angles.sum()
    if total <= 0.0:
        return None
    exponent = 2.0 * np.pi / total
    scaled = angles * exponent
    if (scaled >= np.pi - 1e-9).any() or (scaled <= 1e-12).any():
        return None
    theta = np.concatenate([[0.0], np.cumsum(scaled)[:-1]])
    r = radii**exponent
    r /= r.max()  # conditioning only; the chart is defined up to scale
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def _ear_quality(pts: np.ndarray, a: int, b: int, c: int) -> float:
    """Minimum interior angle of the candidate ear; larger is better."""
    p = pts[[a, b, c]]
    sides = [p[1] - p[0], p[2] - p[1], p[0] - p[2]]
    best = np.inf
    for i in range(3):
        u = -sides[i - 1]
        v = sides[i]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0 or nv == 0:
            return -np.inf
        ang = np.arccos(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
        best = min(best, ang)
    return best


def _in_circumcircle(tri: np.ndarray, p: np.ndarray) -> bool:
    a, b, c = tri
    ax, ay = a - p
    bx, by = b - p
    cx, cy = c - p
    det = (
        (ax * ax + ay * ay) * (bx * cy - by * cx)
        - (bx * bx + by * by) * (ax * cy - ay * cx)
        + (cx * cx + cy * cy) * (ax * by - ay * bx)
    )
    return det > 1e-12


def triangulate_polygon(
    points: np.ndarray, forbidden: frozenset[tuple[int, int]] = frozenset()
) -> list[tuple[int, int, int]] | None:
    """Triangulate a simple counterclockwise polygon using its vertices only.

    Quality-greedy ear clipping followed by Delaunay edge flips. Chords in
    `forbidden` (sorted index pairs) are never created. Returns None when no
    valid triangulation exists under those constraints.
    """
    m = len(points)
    if m < 3:
        return None
    if m == 3:
        if orient2d(points[0], points[1], points[2]) <= 0:
            return None
        return [(0, 1, 2)]

    scale = np.abs(points).max()
    eps = 1e-12 * max(scale, 1.0) ** 2
    active = list(range(m))
    triangles: list[list[int]] = []

    def chord(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    while len(active) > 3:
        best = None
        best_quality = -np.inf
        n = len(active)
        for pos in range(n):
            a, b, c = active[pos - 1], active[pos], active[(pos + 1) % n]
            if orient2d(points[a], points[b], points[c]) <= eps:
                continue
            if chord(a, c) in forbidden:
                continue
            blocked = False
            for other in active:
                if other in (a, b, c):
                    continue
                bary = barycentric_2d(points[[a, b, c]], points[other])
                if (bary > -1e-9).all():
                    blocked = True
                    break
            if blocked:
                continue
            q = _ear_quality(points, a, b, c)
            if q > best_quality:
                best_quality = q
                best = pos
        if best is None:
            return None
        a, b, c = active[best - 1], active[best], active[(best + 1) % len(active)]
        triangles.append([a, b, c])
        active.pop(best)
    a, b, c = active
    if orient2d(points[a], points[b], points[c]) <= eps:
        return None
    triangles.append([a, b, c])

    # Delaunay improvement by local flips, skipping forbidden chords.
    for _ in range(3 * m):
        edge_owner: dict[tuple[int, int], list[int]] = {}
        for ti, (a, b, c) in enumerate(triangles):
            for u, v in ((a, b), (b, c), (c, a)):
                edge_owner.setdefault(chord(u, v), []).append(ti)
        flipped = False
        for (u, v), owners in edge_owner.items():
            if len(owners) != 2:
                continue
            t0, t1 = owners
            p0 = next(x for x in triangles[t0] if x not in (u, v))
            p1 = next(x for x in triangles[t1] if x not in (u, v))
            if chord(p0, p1) in forbidden or chord(p0, p1) in edge_owner:
                continue
            if not _in_circumcircle(points[triangles[t0]], points[p1]):
                continue
            cand0 = [p0, u, p1] if orient2d(points[p0], points[u], points[p1]) > eps else None
            cand1 = [p1, v, p0] if orient2d(points[p1], points[v], points[p0]) > eps else None
            if cand0 is None or cand1 is None:
                continue
            triangles[t0] = cand0
            triangles[t1] = cand1
            flipped = True
            break
        if not flipped:
            break
    return [tuple(t) for t in triangles]


def clip_polygon_to_triangle(
    polygon: np.ndarray, tri: np.ndarray, eps: float
) -> np.ndarray | None:
    """Sutherland-Hodgman clip of a convex polygon by a counterclockwise triangle."""
    pts = [np.asarray(p, dtype=np.float64) for p in polygon]
    for i in range(3):
        a = tri[i]
        b = tri[(i + 1) % 3]
        edge = b - a
        normal = np.array([-edge[1], edge[0]])  # inward for a CCW triangle
        kept: list[np.ndarray] = []
        n = len(pts)
        if n == 0:
            return None
        dist = [float(np.dot(p - a, normal)) for p in pts]
        for j in range(n):
            k = (j + 1) % n
            if dist[j] >= -eps:
                kept.append(pts[j])
            crosses = (dist[j] > eps and dist[k] < -eps) or (dist[j] < -eps and dist[k] > eps)
            if crosses:
                t = dist[j] / (dist[j] - dist[k])
                kept.append(pts[j] + t * (pts[k] - pts[j]))
        pts = kept
        if len(pts) < 3:
            return None
    return np.asarray(pts)


def fan_triangulate(polygon: np.ndarray) -> list[np.ndarray]:
    """Split a convex polygon into triangles around its first vertex."""
    return [np.stack([polygon[0], polygon[i], polygon[i + 1]]) for i in range(1, len(polygon) - 1)]
