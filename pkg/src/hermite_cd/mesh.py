"""Structured triangulations of the unit square and of the quarter unit disk.

Edges carry one global unit normal each; both adjacent triangles refer to
the same record, which is what lets edge degrees of freedom be shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Callable

import numpy as np


class MeshError(ValueError):
    """Raised for structurally invalid triangulations."""


class Marker(IntEnum):
    INTERIOR = 0
    DIRICHLET_ZERO = 1
    FLUX_ZERO = 2


class DomainId:
    UNIT_SQUARE = "unit_square"
    QUARTER_DISK = "quarter_disk"


@dataclass(frozen=True)
class EdgeRecord:
    vertices: tuple[int, int]
    normal: np.ndarray
    triangles: tuple[int, ...]
    marker: Marker
    length: float


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation with edge topology.

    ``triangle_edges[t, i]`` is the edge opposite local vertex ``i`` of
    triangle ``t``. ``edge_triangles`` is padded with -1 for boundary edges.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edge_vertices: np.ndarray
    edge_normals: np.ndarray
    edge_lengths: np.ndarray
    edge_triangles: np.ndarray
    edge_markers: np.ndarray
    triangle_edges: np.ndarray
    domain_id: str

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edge_vertices)

    @property
    def edges(self) -> list[EdgeRecord]:
        out = []
        for e in range(self.n_edges):
            tris = tuple(int(t) for t in self.edge_triangles[e] if t >= 0)
            out.append(
                EdgeRecord(
                    vertices=(int(self.edge_vertices[e, 0]), int(self.edge_vertices[e, 1])),
                    normal=self.edge_normals[e].copy(),
                    triangles=tris,
                    marker=Marker(int(self.edge_markers[e])),
                    length=float(self.edge_lengths[e]),
                )
            )
        return out

    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_triangles[:, 1] < 0)

    def edges_with_marker(self, marker: Marker) -> np.ndarray:
        return np.flatnonzero(self.edge_markers == marker)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def area(self) -> float:
        return float(self.signed_areas().sum())

    def diameters(self) -> np.ndarray:
        """Longest edge of every triangle."""
        p = self.vertices[self.triangles]
        lengths = np.linalg.norm(p[:, [1, 2, 0]] - p[:, [2, 0, 1]], axis=2)
        return lengths.max(axis=1)

    @property
    def h(self) -> float:
        return float(self.diameters().max())

    def min_angles(self) -> np.ndarray:
        """Smallest interior angle of every triangle, in degrees."""
        p = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            cosang = np.einsum("ij,ij->i", u, v) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
            )
            angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        return np.min(angles, axis=0)


BoundaryMarker = Callable[[np.ndarray, np.ndarray], Marker]


def _all_dirichlet(xa: np.ndarray, xb: np.ndarray) -> Marker:
    return Marker.DIRICHLET_ZERO


def build_edge_topology(
    vertices: np.ndarray,
    triangles: np.ndarray,
    domain_id: str = DomainId.UNIT_SQUARE,
    boundary_marker: BoundaryMarker = _all_dirichlet,
) -> Mesh:
    """Enumerate edges, fix their global normals and fill adjacency/markers.

    Edges are keyed by (min vertex, max vertex) and sorted by that key. The
    normal is the unit tangent from the lower to the higher vertex index
    rotated by -90 degrees. ``boundary_marker`` receives the two endpoint
    coordinates of each boundary edge.
    """
    vertices = np.ascontiguousarray(vertices, dtype=float)
    triangles = np.ascontiguousarray(triangles, dtype=np.int64)
    nt = len(triangles)

    # local edge i is opposite local vertex i
    local = np.stack(
        [triangles[:, [1, 2]], triangles[:, [2, 0]], triangles[:, [0, 1]]], axis=1
    )
    keys = np.sort(local.reshape(-1, 2), axis=1)
    edge_vertices, inverse, counts = np.unique(
        keys, axis=0, return_inverse=True, return_counts=True
    )
    inverse = inverse.reshape(-1)
    if np.any(counts > 2):
        bad = edge_vertices[counts > 2][0]
        raise MeshError(f"non-manifold edge {tuple(bad)} shared by more than 2 triangles")
    triangle_edges = inverse.reshape(nt, 3)

    ne = len(edge_vertices)
    edge_triangles = np.full((ne, 2), -1, dtype=np.int64)
    slot = np.zeros(ne, dtype=np.int64)
    for t in range(nt):
        for i in range(3):
            e = triangle_edges[t, i]
            edge_triangles[e, slot[e]] = t
            slot[e] += 1

    tangent = vertices[edge_vertices[:, 1]] - vertices[edge_vertices[:, 0]]
    edge_lengths = np.linalg.norm(tangent, axis=1)
    if np.any(edge_lengths == 0.0):
        raise MeshError("zero-length edge")
    tangent /= edge_lengths[:, None]
    edge_normals = np.column_stack([tangent[:, 1], -tangent[:, 0]])

    edge_markers = np.full(ne, int(Marker.INTERIOR), dtype=np.int64)
    for e in np.flatnonzero(counts == 1):
        xa, xb = vertices[edge_vertices[e]]
        edge_markers[e] = int(boundary_marker(xa, xb))

    mesh = Mesh(
        vertices=vertices,
        triangles=triangles,
        edge_vertices=edge_vertices,
        edge_normals=edge_normals,
        edge_lengths=edge_lengths,
        edge_triangles=edge_triangles,
        edge_markers=edge_markers,
        triangle_edges=triangle_edges,
        domain_id=domain_id,
    )
    if np.any(mesh.signed_areas() <= 0.0):
        raise MeshError("triangles must be counterclockwise with positive area")
    for arr in (vertices, triangles, edge_vertices, edge_normals, edge_lengths,
                edge_triangles, edge_markers, triangle_edges):
        arr.setflags(write=False)
    return mesh


def _lattice(L: int) -> tuple[np.ndarray, np.ndarray]:
    g = np.arange(L + 1) / L
    x, y = np.meshgrid(g, g)
    vertices = np.column_stack([x.ravel(), y.ravel()])
    j, i = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    a = (j * (L + 1) + i).ravel()
    b, c, d = a + 1, a + L + 2, a + L + 1
    # split each cell along its (1,1) diagonal
    lower = np.column_stack([a, b, c])
    upper = np.column_stack([a, c, d])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return vertices, triangles


def build_square_mesh(L: int) -> Mesh:
    """Uniform mesh of [0,1]^2 with 2L^2 triangles, all boundary edges u = 0."""
    if L < 1:
        raise ValueError("L must be >= 1")
    vertices, triangles = _lattice(L)
    return build_edge_topology(vertices, triangles, DomainId.UNIT_SQUARE)


def map_to_quarter_disk(points: np.ndarray) -> np.ndarray:
    """Radially project concentric lattice squares onto concentric arcs."""
    points = np.asarray(points, dtype=float)
    m = points.max(axis=-1)
    r = np.hypot(points[..., 0], points[..., 1])
    scale = np.divide(m, r, out=np.zeros_like(m), where=r > 0)
    return points * scale[..., None]


def _quarter_disk_marker(xa: np.ndarray, xb: np.ndarray) -> Marker:
    if (xa[0] == 0.0 and xb[0] == 0.0) or (xa[1] == 0.0 and xb[1] == 0.0):
        return Marker.FLUX_ZERO
    return Marker.DIRICHLET_ZERO


def build_quarter_disk_mesh(L: int) -> Mesh:
    """Quarter of the unit disk (x1, x2 > 0) with 2L^2 triangles.

    Axis edges are symmetry boundaries (zero normal flux); chords of the arc
    are Dirichlet edges.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    vertices, triangles = _lattice(L)
    return build_edge_topology(
        map_to_quarter_disk(vertices), triangles, DomainId.QUARTER_DISK, _quarter_disk_marker
    )


def build_mesh(domain_id: str, L: int) -> Mesh:
    if domain_id == DomainId.UNIT_SQUARE:
        return build_square_mesh(L)
    if domain_id == DomainId.QUARTER_DISK:
        return build_quarter_disk_mesh(L)
    raise ValueError(f"unknown domain {domain_id!r}")


def dump_mesh(mesh: Mesh, path: str | Path) -> None:
    """Plain-text dump: "nv nt ne", vertices, triangles, then "i j marker" edges."""
    lines = [f"{mesh.n_vertices} {mesh.n_triangles} {mesh.n_edges}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines += [
        f"{i} {j} {m}"
        for (i, j), m in zip(mesh.edge_vertices.tolist(), mesh.edge_markers.tolist())
    ]
    Path(path).write_text("\n".join(lines) + "\n")
