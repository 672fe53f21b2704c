"""RT0 x P0 mixed baselines for convection-diffusion.

Method A works with the diffusive flux p = -K grad u (non-divergence form):

    (K^-1 p, q) - (u, div q)        = 0
    (div p, v)  - (w . K^-1 p, v)   = (f, v)

Method B works with the total flux p = -K grad u + w u (divergence form):

    (K^-1 p, q) - (u, div q) - (K^-1 w u, q) = 0
    (div p, v)  - (div w u, v)                = (f, v)

Boundary data u = g on Dirichlet edges enters the first equation as
-(g, q . n) on the boundary; g = None means u = 0.

Unknowns are ordered edges (flux coefficients) first, then triangles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    MeshGeometry,
    TriangleGeometry,
    dirichlet_edge_integrals,
    map_points,
    mesh_geometry,
    quadrature_rule,
)
from .hermite import DiffusionTensor
from .mesh import Mesh
from .system import LinearSystem

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class RT0Function:
    """Global RT0 field: one mean normal flux per edge (global normals)."""

    edge_fluxes: np.ndarray

    def element_coefficients(self, mesh: Mesh, geom: MeshGeometry) -> tuple[np.ndarray, np.ndarray]:
        """(c, e) with q|_T = c x + e on every triangle."""
        outward = geom.signs * self.edge_fluxes[mesh.triangle_edges]
        coef = outward / geom.heights
        return coef.sum(axis=1), -np.einsum("tk,tkd->td", coef, geom.vertices)


@dataclass(frozen=True, eq=False)
class MixedSolution:
    p: RT0Function
    u: np.ndarray  # one value per triangle


def rt0_basis(tri: TriangleGeometry) -> list[tuple[float, np.ndarray]]:
    """Restrictions (c, e) of the three global edge basis fields to ``tri``.

    Field j is sign_j (x - x_j) / h_j, whose mean normal component is 1 on
    edge j (global normal) and 0 on the other two edges.
    """
    out = []
    for j in range(3):
        c = tri.signs[j] / tri.heights[j]
        out.append((float(c), -c * tri.vertices[j]))
    return out


def _basis_at_points(geom: MeshGeometry, x: np.ndarray) -> np.ndarray:
    """Basis fields at per-element points x (nt, nq, 2); returns (nt, 3, nq, 2)."""
    coef = geom.signs / geom.heights
    return coef[:, :, None, None] * (x[:, None, :, :] - geom.vertices[:, :, None, :])


def _common(mesh: Mesh, K: DiffusionTensor, f: Field, quad_degree: int):
    geom = mesh_geometry(mesh)
    rule = quadrature_rule(quad_degree)
    x = map_points(geom.vertices, rule)
    wq = geom.areas[:, None] * rule.weights[None, :]
    q = _basis_at_points(geom, x)
    Kq = q @ K.inverse.T
    mass = np.einsum("tq,tiqd,tjqd->tij", wq, q, Kq)
    div = geom.signs * geom.face_lengths  # integral of div q_j over T
    load = np.einsum("tq,tq->t", wq, np.asarray(f(x), dtype=float))
    return geom, x, wq, Kq, mass, div, load


def _scatter(mesh: Mesh, blocks, load: np.ndarray, g: Field | None) -> LinearSystem:
    ne, nt = mesh.n_edges, mesh.n_triangles
    E = mesh.triangle_edges
    cells = ne + np.arange(nt)
    mass, pu, up, uu = blocks
    rows = [np.repeat(E, 3, axis=1), E, np.repeat(cells[:, None], 3, axis=1), cells]
    cols = [np.tile(E, (1, 3)), np.repeat(cells[:, None], 3, axis=1), E, cells]
    vals = [mass.reshape(nt, 9), pu, up, uu]
    rhs = np.zeros(ne + nt)
    rhs[:ne] = -dirichlet_edge_integrals(mesh, g)
    rhs[ne:] = load
    return LinearSystem.from_triplets(
        np.concatenate([r.ravel() for r in rows]),
        np.concatenate([c.ravel() for c in cols]),
        np.concatenate([v.ravel() for v in vals]),
        rhs,
        ne + nt,
    )


def assemble_method_A(
    mesh: Mesh,
    K: DiffusionTensor,
    w: Field,
    f: Field,
    quad_degree: int = 6,
    g: Field | None = None,
) -> LinearSystem:
    geom, x, wq, Kq, mass, div, load = _common(mesh, K, f, quad_degree)
    wx = np.asarray(w(x), dtype=float)
    conv = np.einsum("tq,tqd,tjqd->tj", wq, wx, Kq)
    return _scatter(mesh, (mass, -div, div - conv, np.zeros(mesh.n_triangles)), load, g)


def assemble_method_B(
    mesh: Mesh,
    K: DiffusionTensor,
    w: Field,
    f: Field,
    div_w: Field,
    quad_degree: int = 6,
    g: Field | None = None,
) -> LinearSystem:
    geom, x, wq, Kq, mass, div, load = _common(mesh, K, f, quad_degree)
    wx = np.asarray(w(x), dtype=float)
    coupling = np.einsum("tq,tqd,tiqd->ti", wq, wx, Kq)
    reaction = np.einsum("tq,tq->t", wq, np.asarray(div_w(x), dtype=float))
    return _scatter(mesh, (mass, -div - coupling, div, -reaction), load, g)


def split_solution(mesh: Mesh, x: np.ndarray) -> MixedSolution:
    ne = mesh.n_edges
    return MixedSolution(RT0Function(np.asarray(x[:ne]).copy()), np.asarray(x[ne:]).copy())
