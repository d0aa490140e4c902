"""Structured triangulation of the rectangular plate and Lagrange node sets.

Boundary tags follow the plate notation used throughout the package:

    DELTA1  bottom face  y = 0
    DELTA2  right end    x = Lx
    DELTA3  top face     y = Ly
    DELTA4  left end     x = 0   (driven, Dirichlet)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, OutOfDomainError

INTERIOR = 0
DELTA1 = 1
DELTA2 = 2
DELTA3 = 3
DELTA4 = 4

# corner ownership: a Dirichlet edge keeps its corners
_TAG_PRECEDENCE = (DELTA4, DELTA2, DELTA1, DELTA3)


@dataclass(frozen=True)
class PlateGeometry:
    Lx: float = 5.0e-2
    Ly: float = 1.0e-3

    def __post_init__(self):
        for name in ("Lx", "Ly"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidArgumentError(f"{name} must be a positive finite length, got {v!r}")
        if not math.isfinite(self.Lx / self.Ly):
            raise InvalidArgumentError("Lx/Ly is not finite")

    @property
    def tolerance(self) -> float:
        return 1e-12 * max(self.Lx, self.Ly)


def boundary_tag_of(point, geom: PlateGeometry, tol: float | None = None) -> int | None:
    """Return the boundary tag of ``point`` or ``None`` for interior points."""
    if tol is None:
        tol = geom.tolerance
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    x, y = float(point[0]), float(point[1])
    hits = {
        DELTA4: abs(x) <= tol,
        DELTA2: abs(x - geom.Lx) <= tol,
        DELTA1: abs(y) <= tol,
        DELTA3: abs(y - geom.Ly) <= tol,
    }
    for tag in _TAG_PRECEDENCE:
        if hits[tag]:
            return tag
    return None


@dataclass(frozen=True, eq=False)
class Mesh:
    geometry: PlateGeometry
    nx: int
    ny: int
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counter-clockwise
    edges: np.ndarray  # (ne, 2), sorted vertex pairs
    triangle_edges: np.ndarray  # (nt, 3): edge ids of local edges (0,1), (1,2), (2,0)
    boundary_edges: np.ndarray  # indices into ``edges``
    boundary_edge_tags: np.ndarray
    vertex_tags: np.ndarray  # 0 for interior vertices
    h: float

    @property
    def boundary_tags(self) -> dict[tuple[int, int], int]:
        return {
            (int(self.edges[e, 0]), int(self.edges[e, 1])): int(t)
            for e, t in zip(self.boundary_edges, self.boundary_edge_tags)
        }

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def dx(self) -> float:
        return self.geometry.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.geometry.Ly / self.ny

    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.vertices[self.triangles]
        angles = []
        for a in range(3):
            u = p[:, (a + 1) % 3] - p[:, a]
            v = p[:, (a + 2) % 3] - p[:, a]
            cosang = np.einsum("ij,ij->i", u, v) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
            )
            angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        return float(np.min(angles))

    def locate(self, points, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Find containing triangles and barycentric coordinates.

        Uses the structured cell layout directly. Points within ``tol`` of
        the plate are snapped inside; anything further raises
        :class:`OutOfDomainError`.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if tol is None:
            tol = 1e-9 * max(self.geometry.Lx, self.geometry.Ly)
        x, y = pts[:, 0], pts[:, 1]
        Lx, Ly = self.geometry.Lx, self.geometry.Ly
        outside = (x < -tol) | (x > Lx + tol) | (y < -tol) | (y > Ly + tol) | ~np.isfinite(pts).all(axis=1)
        if np.any(outside):
            bad = pts[np.argmax(outside)]
            raise OutOfDomainError(f"point ({bad[0]!r}, {bad[1]!r}) lies outside the plate")
        s = np.clip(x / self.dx, 0.0, self.nx)
        t = np.clip(y / self.dy, 0.0, self.ny)
        i = np.minimum(np.floor(s).astype(np.int64), self.nx - 1)
        j = np.minimum(np.floor(t).astype(np.int64), self.ny - 1)
        upper = (t - j) > (s - i)
        tri = 2 * (j * self.nx + i) + upper.astype(np.int64)
        bary = barycentric(self.vertices[self.triangles[tri]], pts)
        bary = np.clip(bary, 0.0, 1.0)
        bary /= bary.sum(axis=1, keepdims=True)
        return tri, bary

    def write_text(self, path) -> None:
        """Dump as ``nv nt`` header, ``x y tag`` rows, then ``i j k`` rows."""
        lines = [f"{self.n_vertices} {self.n_triangles}"]
        for (x, y), tag in zip(self.vertices, self.vertex_tags):
            lines.append(f"{x!r} {y!r} {int(tag)}")
        for a, b, c in self.triangles:
            lines.append(f"{a} {b} {c}")
        Path(path).write_text("\n".join(lines) + "\n")


def barycentric(tri_coords: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of ``pts[n]`` in triangle ``tri_coords[n]``."""
    p0, p1, p2 = tri_coords[:, 0], tri_coords[:, 1], tri_coords[:, 2]
    v1 = p1 - p0
    v2 = p2 - p0
    w = pts - p0
    det = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
    l1 = (w[:, 0] * v2[:, 1] - w[:, 1] * v2[:, 0]) / det
    l2 = (v1[:, 0] * w[:, 1] - v1[:, 1] * w[:, 0]) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])


def _cells_along_length(geom: PlateGeometry, ny: int) -> int:
    ratio = ny * geom.Lx / geom.Ly
    # guard ceil against ratio landing a few ulps above an integer
    return max(1, math.ceil(ratio * (1.0 - 1e-12)))


def build_structured_mesh(geom: PlateGeometry, ny: int) -> Mesh:
    """Split an ``nx`` x ``ny`` grid of cells into two triangles each.

    Every cell uses the lower-left to upper-right diagonal, so the layout is
    fully deterministic.
    """
    if isinstance(ny, bool) or not isinstance(ny, (int, np.integer)) or ny < 1:
        raise InvalidArgumentError(f"ny must be a positive integer, got {ny!r}")
    ny = int(ny)
    nx = _cells_along_length(geom, ny)

    xs = np.arange(nx + 1) * (geom.Lx / nx)
    ys = np.arange(ny + 1) * (geom.Ly / ny)
    xs[-1], ys[-1] = geom.Lx, geom.Ly
    X, Y = np.meshgrid(xs, ys)  # row j holds y = ys[j]
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    a = (jj * (nx + 1) + ii).ravel()
    b = a + 1
    c = a + nx + 2
    d = a + nx + 1
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([a, b, c])
    triangles[1::2] = np.column_stack([a, c, d])

    local = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 3, 2)
    all_edges = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(all_edges, axis=0, return_inverse=True)
    triangle_edges = inverse.reshape(-1, 3)

    counts = np.bincount(inverse.ravel(), minlength=len(edges))
    boundary_edges = np.flatnonzero(counts == 1)
    mids = 0.5 * (vertices[edges[boundary_edges, 0]] + vertices[edges[boundary_edges, 1]])
    boundary_edge_tags = np.array([boundary_tag_of(m, geom) for m in mids], dtype=np.int64)

    vertex_tags = np.array(
        [boundary_tag_of(v, geom) or INTERIOR for v in vertices], dtype=np.int64
    )

    return Mesh(
        geometry=geom,
        nx=nx,
        ny=ny,
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        triangle_edges=triangle_edges,
        boundary_edges=boundary_edges,
        boundary_edge_tags=boundary_edge_tags,
        vertex_tags=vertex_tags,
        # longest edge is the cell diagonal; nominal value avoids coordinate roundoff
        h=math.hypot(geom.Lx / nx, geom.Ly / ny),
    )


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Lagrange nodes of degree ``k`` with element-to-node connectivity.

    Vertices come first in (y, x) lexicographic order, followed by edge
    midpoints (k=2) in the same order. ``element_nodes`` lists per triangle
    the three vertices and then the midpoints of local edges (0,1), (1,2),
    (2,0).
    """

    degree: int
    nodes: np.ndarray
    element_nodes: np.ndarray
    dirichlet_nodes: np.ndarray
    mesh: Mesh = field(repr=False)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def n_dofs(self) -> int:
        return 2 * len(self.nodes)

    @property
    def dirichlet_dofs(self) -> np.ndarray:
        d = self.dirichlet_nodes
        return np.column_stack([2 * d, 2 * d + 1]).ravel()

    def node_index(self, point, tol: float | None = None) -> int:
        if tol is None:
            tol = self.mesh.geometry.tolerance
        dist = np.abs(self.nodes - np.asarray(point, dtype=float)).max(axis=1)
        j = int(np.argmin(dist))
        if dist[j] > tol:
            raise InvalidArgumentError(f"no node at {point!r}")
        return j


def enumerate_nodes(mesh: Mesh, k: int) -> NodeSet:
    if k not in (1, 2):
        raise InvalidArgumentError(f"unsupported polynomial degree {k!r}; expected 1 or 2")
    nv = mesh.n_vertices
    if k == 1:
        nodes = mesh.vertices.copy()
        element_nodes = mesh.triangles.copy()
    else:
        mids = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
        order = np.lexsort((mids[:, 0], mids[:, 1]))
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        nodes = np.vstack([mesh.vertices, mids[order]])
        element_nodes = np.hstack([mesh.triangles, nv + rank[mesh.triangle_edges]])
    on_left = np.abs(nodes[:, 0]) <= mesh.geometry.tolerance
    return NodeSet(
        degree=k,
        nodes=nodes,
        element_nodes=element_nodes,
        dirichlet_nodes=np.flatnonzero(on_left),
        mesh=mesh,
    )
