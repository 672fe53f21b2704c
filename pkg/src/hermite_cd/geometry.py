"""Triangle geometry and quadrature on triangles and segments."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .mesh import Marker, Mesh


class DegenerateElementError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleGeometry:
    """Geometry of one triangle; index ``i`` refers to vertex i and its opposite face.

    ``signs[i]`` is n_T,i . n_F for the global edge normal, +1 when the
    triangle is used standalone.
    """

    vertices: np.ndarray
    area: float
    centroid: np.ndarray
    face_lengths: np.ndarray
    normals: np.ndarray
    heights: np.ndarray
    signs: np.ndarray


def triangle_geometry(vertices, signs=None) -> TriangleGeometry:
    p = np.asarray(vertices, dtype=float).reshape(3, 2)
    e1, e2 = p[1] - p[0], p[2] - p[0]
    area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    if not area > 0.0:
        raise DegenerateElementError(f"triangle has non-positive area {area}")
    # face i runs from vertex i+1 to vertex i+2 (counterclockwise)
    tang = p[[2, 0, 1]] - p[[1, 2, 0]]
    lengths = np.linalg.norm(tang, axis=1)
    normals = np.column_stack([tang[:, 1], -tang[:, 0]]) / lengths[:, None]
    return TriangleGeometry(
        vertices=p,
        area=float(area),
        centroid=p.mean(axis=0),
        face_lengths=lengths,
        normals=normals,
        heights=2.0 * area / lengths,
        signs=np.ones(3) if signs is None else np.asarray(signs, dtype=float),
    )


@dataclass(frozen=True)
class MeshGeometry:
    """Per-triangle geometry arrays for a whole mesh (leading axis = triangle)."""

    vertices: np.ndarray  # (nt, 3, 2)
    areas: np.ndarray  # (nt,)
    centroids: np.ndarray  # (nt, 2)
    face_lengths: np.ndarray  # (nt, 3)
    normals: np.ndarray  # (nt, 3, 2) outward
    heights: np.ndarray  # (nt, 3)
    signs: np.ndarray  # (nt, 3)

    def triangle(self, t: int) -> TriangleGeometry:
        return TriangleGeometry(
            vertices=self.vertices[t],
            area=float(self.areas[t]),
            centroid=self.centroids[t],
            face_lengths=self.face_lengths[t],
            normals=self.normals[t],
            heights=self.heights[t],
            signs=self.signs[t],
        )


def mesh_geometry(mesh: Mesh) -> MeshGeometry:
    p = mesh.vertices[mesh.triangles]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    if np.any(areas <= 0.0):
        raise DegenerateElementError("mesh contains non-positive area triangles")
    tang = p[:, [2, 0, 1]] - p[:, [1, 2, 0]]
    lengths = np.linalg.norm(tang, axis=2)
    normals = np.stack([tang[..., 1], -tang[..., 0]], axis=-1) / lengths[..., None]
    signs = np.einsum("tij,tij->ti", normals, mesh.edge_normals[mesh.triangle_edges])
    return MeshGeometry(
        vertices=p,
        areas=areas,
        centroids=p.mean(axis=1),
        face_lengths=lengths,
        normals=normals,
        heights=2.0 * areas[:, None] / lengths,
        signs=np.rint(signs),
    )


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points (n, 3) and weights summing to one."""

    points: np.ndarray
    weights: np.ndarray
    degree: int


def _orbit(*bary) -> list[tuple[float, float, float]]:
    return sorted(set(permutations(bary)))


def _from_orbits(orbits, degree) -> QuadratureRule:
    pts, wts = [], []
    for weight, bary in orbits:
        for p in _orbit(*bary):
            pts.append(p)
            wts.append(weight)
    return QuadratureRule(np.array(pts), np.array(wts), degree)


def _dunavant(degree: int) -> QuadratureRule:
    if degree == 2:
        return _from_orbits([(1 / 3, (2 / 3, 1 / 6, 1 / 6))], 2)
    if degree == 4:
        a1, a2 = 0.445948490915965, 0.091576213509771
        return _from_orbits(
            [
                (0.223381589678011, (a1, a1, 1 - 2 * a1)),
                (0.109951743655322, (a2, a2, 1 - 2 * a2)),
            ],
            4,
        )
    if degree == 6:
        a1, a2 = 0.249286745170910, 0.063089014491502
        b1, b2 = 0.053145049844817, 0.310352451033784
        return _from_orbits(
            [
                (0.116786275726379, (a1, a1, 1 - 2 * a1)),
                (0.050844906370207, (a2, a2, 1 - 2 * a2)),
                (0.082851075618374, (b1, b2, 1 - b1 - b2)),
            ],
            6,
        )
    raise AssertionError(degree)


def _symmetrized_conical(degree: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi x Gauss-Legendre product, averaged over vertex permutations."""
    n = degree // 2 + 1
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xl, wl = np.polynomial.legendre.leggauss(n)
    s, ws = (1 + xj) / 2, wj / 4  # weight (1 - s) on [0, 1]
    t, wt = (1 + xl) / 2, wl / 2
    l1 = np.repeat(s, n)
    l2 = (1 - np.repeat(s, n)) * np.tile(t, n)
    w = np.repeat(ws, n) * np.tile(wt, n)
    bary = np.column_stack([1 - l1 - l2, l1, l2])
    w = w / w.sum()
    pts = np.concatenate([bary[:, list(perm)] for perm in permutations(range(3))])
    return QuadratureRule(pts, np.tile(w, 6) / 6, degree)


SUPPORTED_DEGREES = (2, 4, 6, 10)


@lru_cache(maxsize=None)
def quadrature_rule(degree: int) -> QuadratureRule:
    """Symmetric positive-weight rule exact for total degree ``degree``."""
    if degree not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported quadrature degree {degree}; choose from {SUPPORTED_DEGREES}")
    if degree <= 6:
        rule = _dunavant(degree)
    else:
        rule = _symmetrized_conical(degree)
    rule.points.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


def map_points(vertices: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Physical quadrature points; ``vertices`` is (3, 2) or (nt, 3, 2)."""
    return np.einsum("qk,...kd->...qd", rule.points, vertices)


def integrate(vertices, f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule):
    """Integrate ``f`` (vectorised over an (n, 2) array of points) over one triangle."""
    geo = triangle_geometry(vertices)
    vals = np.asarray(f(map_points(geo.vertices, rule)), dtype=float)
    return geo.area * np.tensordot(rule.weights, vals, axes=(0, 0))


def gauss_segment(n: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre abscissae on [0, 1] and weights summing to one."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (1 + x) / 2, w / 2


def dirichlet_edge_integrals(
    mesh: Mesh, g: Callable[[np.ndarray], np.ndarray] | None, n_gauss: int = 4
) -> np.ndarray:
    """sigma_F * int_F g ds on every Dirichlet edge, zero elsewhere.

    sigma_F is +1 when the global edge normal points out of the domain.
    """
    out = np.zeros(mesh.n_edges)
    if g is None:
        return out
    edges = mesh.edges_with_marker(Marker.DIRICHLET_ZERO)
    if len(edges) == 0:
        return out
    s, ws = gauss_segment(n_gauss)
    p0 = mesh.vertices[mesh.edge_vertices[edges, 0]]
    p1 = mesh.vertices[mesh.edge_vertices[edges, 1]]
    pts = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]
    vals = np.asarray(g(pts), dtype=float) @ ws * mesh.edge_lengths[edges]
    tri = mesh.edge_triangles[edges, 0]
    centroid = mesh.vertices[mesh.triangles[tri]].mean(axis=1)
    sigma = np.sign(np.einsum("ed,ed->e", 0.5 * (p0 + p1) - centroid, mesh.edge_normals[edges]))
    out[edges] = sigma * vals
    return out
