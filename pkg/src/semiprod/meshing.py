"""Convex horizontal domains and their quality triangulations.

Domains live in the z = 0 leaf.  Meshes are built from a hexagonal
interior lattice plus evenly spaced boundary vertices, Delaunay
triangulated and Laplacian-smoothed; the result is a simplicial disk whose
boundary vertices lie exactly on the domain boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay


class DegenerateDomain(ValueError):
    """Domain is not a strictly convex disk."""


@dataclass(frozen=True)
class ConvexDomain:
    """Closed convex disk in the z = 0 leaf.

    ``vertices`` is the counterclockwise polygon used for point location
    and interior seeding.  For analytic boundaries (circle/ellipse) the
    polygon is a fine inscribed approximation and ``kind`` plus the shape
    parameters let the mesher put boundary vertices exactly on the curve.
    """

    vertices: np.ndarray
    kind: str = "polygon"
    center: tuple[float, float] = (0.0, 0.0)
    axes: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise DegenerateDomain("need at least 3 boundary vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        scale = np.abs(e).max() ** 2
        if np.any(cross < -1e-12 * scale):
            raise DegenerateDomain("vertices must run counterclockwise around a convex disk")
        if self.kind == "polygon" and np.any(np.abs(cross) <= 1e-12 * scale):
            raise DegenerateDomain("three consecutive vertices are collinear")
        area = 0.5 * abs(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
        if area <= 1e-14:
            raise DegenerateDomain("domain has zero area")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @staticmethod
    def polygon(vertices) -> "ConvexDomain":
        return ConvexDomain(np.asarray(vertices, dtype=float))

    @staticmethod
    def circle(center, radius: float, resolution: int = 256) -> "ConvexDomain":
        if radius <= 0:
            raise DegenerateDomain("radius must be positive")
        t = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
        pts = np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])
        return ConvexDomain(pts, kind="circle", center=(float(center[0]), float(center[1])),
                            axes=(float(radius), float(radius)))

    @staticmethod
    def ellipse(center, a_axis: float, b_axis: float, resolution: int = 256) -> "ConvexDomain":
        if a_axis <= 0 or b_axis <= 0:
            raise DegenerateDomain("axes must be positive")
        t = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
        pts = np.column_stack([center[0] + a_axis * np.cos(t), center[1] + b_axis * np.sin(t)])
        return ConvexDomain(pts, kind="ellipse", center=(float(center[0]), float(center[1])),
                            axes=(float(a_axis), float(b_axis)))

    def boundary_points(self, spacing: float) -> np.ndarray:
        """Points on the exact boundary with roughly the given spacing."""
        if self.kind in ("circle", "ellipse"):
            a, b = self.axes
            # arclength-uniform via dense sampling of the parameter.
            tt = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
            seg = np.sqrt((a * np.sin(tt)) ** 2 + (b * np.cos(tt)) ** 2) * (2.0 * np.pi / 4096)
            arclen = np.concatenate([[0.0], np.cumsum(seg)])
            total = arclen[-1]
            n = max(8, int(round(total / spacing)))
            targets = np.linspace(0.0, total, n, endpoint=False)
            ts = np.interp(targets, arclen, np.concatenate([tt, [2.0 * np.pi]]))
            return np.column_stack([self.center[0] + a * np.cos(ts),
                                    self.center[1] + b * np.sin(ts)])
        pts = []
        v = self.vertices
        for i in range(len(v)):
            p, q = v[i], v[(i + 1) % len(v)]
            length = np.linalg.norm(q - p)
            n = max(1, int(round(length / spacing)))
            for k in range(n):
                pts.append(p + (q - p) * (k / n))
        return np.array(pts)

    def contains(self, pts: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """True for points at least ``margin`` inside every boundary edge."""
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(e, axis=1)
        nrm = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]  # outward
        d = (pts[:, None, :] - v[None, :, :]) * nrm[None, :, :]
        signed = d.sum(axis=2)  # positive outside each edge line
        return np.all(signed <= -margin, axis=1)


@dataclass
class GraphSurface:
    """Triangulated height function over a convex horizontal domain.

    ``points`` are the 2-d domain positions, ``heights`` the vertical
    values, ``boundary_loop`` the counterclockwise ordering of the
    boundary vertices.  Boundary heights are pinned by the solver.
    """

    points: np.ndarray
    triangles: np.ndarray
    heights: np.ndarray
    boundary_mask: np.ndarray
    boundary_loop: np.ndarray
    steep_ramp: bool = field(default=False)

    @property
    def n_vertices(self) -> int:
        return self.points.shape[0]

    def lifted(self, heights=None) -> np.ndarray:
        h = self.heights if heights is None else heights
        return np.column_stack([self.points, h])

    def edges(self) -> np.ndarray:
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()) + self.triangles.shape[0]

    def min_angle_deg(self) -> float:
        p = self.points[self.triangles]
        ang = []
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            w = p[:, (i + 2) % 3] - p[:, i]
            cosv = np.einsum("ij,ij->i", u, w) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
            ang.append(np.degrees(np.arccos(np.clip(cosv, -1.0, 1.0))))
        return float(np.min(ang))

    def interior_indices(self) -> np.ndarray:
        return np.where(~self.boundary_mask)[0]

    def set_boundary_heights(self, values) -> None:
        """Pin heights on the boundary loop (values follow loop order)."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.boundary_loop.shape:
            raise ValueError("one height per boundary-loop vertex required")
        if not np.all(np.isfinite(values)):
            raise ValueError("boundary heights must be finite")
        self.heights[self.boundary_loop] = values

    def boundary_heights(self) -> np.ndarray:
        return self.heights[self.boundary_loop]


def _orient_ccw(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = points[triangles]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) \
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    flipped = triangles.copy()
    neg = cross < 0
    flipped[neg] = flipped[neg][:, [0, 2, 1]]
    return flipped


def _boundary_loop(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Ordered counterclockwise loop of boundary vertices of a disk mesh."""
    t = triangles
    e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    boundary_edges = e[counts[inv] == 1]  # keeps CCW orientation of triangles
    nxt = {int(a): int(b) for a, b in boundary_edges}
    start = int(boundary_edges[0, 0])
    loop = [start]
    cur = nxt[start]
    while cur != start:
        loop.append(cur)
        cur = nxt[cur]
    return np.array(loop, dtype=int)


def triangulate(domain: ConvexDomain, target_edge_length: float) -> GraphSurface:
    """Quality triangulation of the domain with zeroed heights.

    Boundary vertices lie on the exact boundary; interior seeds come from
    a hexagonal lattice clipped away from the boundary, followed by
    Delaunay triangulation and a few rounds of Laplacian smoothing
    (re-triangulating after each).  The result is a simplicial disk with
    minimum angle >= 20 degrees on convex domains whose corners are no
    sharper than that.
    """
    if target_edge_length <= 0:
        raise ValueError("target edge length must be positive")
    boundary = domain.boundary_points(target_edge_length)
    v = domain.vertices
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    dx = target_edge_length
    dy = target_edge_length * np.sqrt(3.0) / 2.0
    ys = np.arange(lo[1] + 0.5 * dy, hi[1], dy)
    seeds = []
    for row, yv in enumerate(ys):
        offset = 0.5 * dx if row % 2 else 0.0
        xs = np.arange(lo[0] + offset, hi[0] + 0.5 * dx, dx)
        seeds.append(np.column_stack([xs, np.full_like(xs, yv)]))
    interior = np.vstack(seeds) if seeds else np.empty((0, 2))
    if interior.size:
        keep = domain.contains(interior, margin=0.55 * target_edge_length)
        interior = interior[keep]

    pts = np.vstack([boundary, interior])
    n_boundary = len(boundary)

    def build(points):
        tri = Delaunay(points)
        simplices = tri.simplices
        # drop degenerate slivers from collinear boundary runs
        p = points[simplices]
        area2 = np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                       - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
        simplices = simplices[area2 > 1e-12 * target_edge_length ** 2]
        return _orient_ccw(points, simplices)

    tris = build(pts)
    for _ in range(4):
        # Laplacian smoothing of interior vertices only.
        neigh_sum = np.zeros_like(pts)
        neigh_cnt = np.zeros(len(pts))
        e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        e = np.unique(np.sort(e, axis=1), axis=0)
        for a, b in ((0, 1), (1, 0)):
            np.add.at(neigh_sum, e[:, a], pts[e[:, b]])
            np.add.at(neigh_cnt, e[:, a], 1.0)
        moved = neigh_sum / np.maximum(neigh_cnt, 1.0)[:, None]
        pts2 = pts.copy()
        pts2[n_boundary:] = moved[n_boundary:]
        inside = domain.contains(pts2[n_boundary:], margin=0.3 * target_edge_length)
        pts2[n_boundary:][~inside] = pts[n_boundary:][~inside]
        pts = pts2
        tris = build(pts)

    mask = np.zeros(len(pts), dtype=bool)
    mask[:n_boundary] = True
    loop = _boundary_loop(pts, tris)
    graph = GraphSurface(points=pts, triangles=tris, heights=np.zeros(len(pts)),
                         boundary_mask=mask, boundary_loop=loop)
    if graph.euler_characteristic() != 1:
        raise DegenerateDomain("triangulation is not a simplicial disk")
    return graph
