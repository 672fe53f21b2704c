"""Hermite quadratic elements with edge-mean flux and cell-mean degrees of freedom.

On each triangle a function has the form

    v(x) = x^t K^{-1} (a x / 2 + b) + d,

so its flux K grad v = a x + b is a lowest-order Raviart-Thomas field and
div(K grad v) = 2a. Three spaces share this local structure and differ in
the edge functional:

* ``U``: mean of K grad v . n over the edge;
* ``V``: mean of (K grad v + w_h Pi_T v) . n, w_h the centroid velocity;
* ``W``: mean of (K grad v - w~_h Pi_T v) . n, w~_h the RT0 velocity.

The ``W`` functional is the negated total flux (-K grad v + w~_h Pi_T v) . n,
so that its first three local basis functions coincide with those of ``U``.
Local index i = 0, 1, 2 is the edge opposite vertex i; index 3 is the cell mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .geometry import MeshGeometry, TriangleGeometry, gauss_segment, mesh_geometry
from .mesh import Marker, Mesh

VectorField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class DiffusionTensor:
    matrix: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=float).reshape(2, 2)
        if not np.allclose(K, K.T, rtol=0, atol=1e-14):
            raise ValueError("diffusion tensor must be symmetric")
        lam = np.linalg.eigvalsh(K)
        if lam[0] <= 0:
            raise ValueError("diffusion tensor must be positive definite")
        object.__setattr__(self, "matrix", K)
        object.__setattr__(self, "inverse", np.linalg.inv(K))
        object.__setattr__(self, "lam_min", float(lam[0]))
        object.__setattr__(self, "lam_max", float(lam[1]))

    @classmethod
    def identity(cls) -> "DiffusionTensor":
        return cls(np.eye(2))


@dataclass(frozen=True)
class LocalQuadratic:
    a: float
    b: np.ndarray
    d: float

    def evaluate(self, K: DiffusionTensor, x) -> tuple[np.ndarray, np.ndarray, float]:
        """Value, gradient and div(K grad) at ``x`` ((2,) or (n, 2))."""
        x = np.asarray(x, dtype=float)
        b = np.asarray(self.b, dtype=float)
        flux = self.a * x + b
        grad = flux @ K.inverse.T
        value = np.einsum("...i,...i->...", x, (0.5 * self.a * x + b) @ K.inverse.T) + self.d
        return value, grad, 2.0 * self.a

    def flux(self, x) -> np.ndarray:
        return self.a * np.asarray(x, dtype=float) + np.asarray(self.b, dtype=float)

    def mean(self, K: DiffusionTensor, tri: TriangleGeometry) -> float:
        return float(quadratic_mean(K, tri.vertices[None], self.a, self.b[None])[0]) + self.d


def second_moments(vertices: np.ndarray) -> np.ndarray:
    """Mean of x x^t over each triangle; ``vertices`` is (nt, 3, 2)."""
    c = vertices.mean(axis=1)
    return np.einsum("tki,tkj->tij", vertices, vertices) / 12.0 + 0.75 * np.einsum(
        "ti,tj->tij", c, c
    )


def quadratic_mean(K: DiffusionTensor, vertices, a, b) -> np.ndarray:
    """Mean over each triangle of x^t K^{-1}(a x / 2 + b), without the constant.

    ``a`` is (nt,) or (nt, m); ``b`` matches with a trailing axis of length 2.
    """
    vertices = np.asarray(vertices, dtype=float)
    S = second_moments(vertices)
    c = vertices.mean(axis=1)
    trKS = np.einsum("ij,tji->t", K.inverse, S)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        return 0.5 * a * trKS + np.einsum("ti,ij,tj->t", c, K.inverse, b)
    return 0.5 * a * trKS[:, None] + np.einsum("ti,ij,tmj->tm", c, K.inverse, b)


# ---------------------------------------------------------------- velocities


class VelocityMode(str, Enum):
    CENTROID_P0 = "centroid_P0"
    VERTEX_P1 = "vertex_P1"
    RT0 = "RT0"


@dataclass(frozen=True, eq=False)
class DiscreteVelocity:
    """Element-wise representation of an interpolated velocity.

    ``data`` is (nt, 2) for CENTROID_P0, (nt, 3, 2) vertex values for
    VERTEX_P1, and for RT0 the pair (a_w (nt,), b_w (nt, 2)).
    """

    mode: VelocityMode
    data: object

    def at(self, bary: np.ndarray, vertices: np.ndarray) -> np.ndarray:
        """Evaluate at barycentric points ``bary`` (nq, 3); returns (nt, nq, 2)."""
        if self.mode is VelocityMode.CENTROID_P0:
            return np.broadcast_to(self.data[:, None, :], (len(self.data), len(bary), 2))
        if self.mode is VelocityMode.VERTEX_P1:
            return np.einsum("qk,tkd->tqd", bary, self.data)
        a_w, b_w = self.data
        x = np.einsum("qk,tkd->tqd", bary, vertices)
        return a_w[:, None, None] * x + b_w[:, None, :]

    def constant(self) -> np.ndarray:
        if self.mode is not VelocityMode.CENTROID_P0:
            raise TypeError("velocity is not element-wise constant")
        return self.data

    def rt0(self) -> tuple[np.ndarray, np.ndarray]:
        if self.mode is not VelocityMode.RT0:
            raise TypeError("velocity is not an RT0 field")
        return self.data


def edge_normal_means(w: VectorField, mesh: Mesh, n_gauss: int = 2) -> np.ndarray:
    """Mean of w . n_F over every edge (global normals)."""
    s, ws = gauss_segment(n_gauss)
    xa = mesh.vertices[mesh.edge_vertices[:, 0]]
    xb = mesh.vertices[mesh.edge_vertices[:, 1]]
    pts = xa[:, None, :] + s[None, :, None] * (xb - xa)[:, None, :]
    vals = np.asarray(w(pts), dtype=float)
    return np.einsum("q,eqd,ed->e", ws, vals, mesh.edge_normals)


def rt0_from_edge_fluxes(geom: MeshGeometry, outward_means: np.ndarray):
    """(a, b) of the element-wise field a x + b with the given outward edge means."""
    coef = outward_means / geom.heights
    a = coef.sum(axis=1)
    b = -np.einsum("tk,tkd->td", coef, geom.vertices)
    return a, b


def interpolate_velocity(
    w: VectorField, mesh: Mesh, mode: VelocityMode | str, geom: MeshGeometry | None = None
) -> DiscreteVelocity:
    mode = VelocityMode(mode)
    geom = mesh_geometry(mesh) if geom is None else geom
    if mode is VelocityMode.CENTROID_P0:
        return DiscreteVelocity(mode, np.asarray(w(geom.centroids), dtype=float))
    if mode is VelocityMode.VERTEX_P1:
        vals = np.asarray(w(mesh.vertices), dtype=float)
        return DiscreteVelocity(mode, vals[mesh.triangles])
    means = edge_normal_means(w, mesh)
    outward = geom.signs * means[mesh.triangle_edges]
    return DiscreteVelocity(mode, rt0_from_edge_fluxes(geom, outward))


# ---------------------------------------------------------------- bases


class Space(str, Enum):
    U = "U"
    V = "V"
    W = "W"


@dataclass(frozen=True)
class BasisArrays:
    """Coefficients of the four local basis functions on every triangle.

    Shapes: a (nt, 4), b (nt, 4, 2), d (nt, 4). Orientation signs are not
    applied; see :class:`DofMap` for the global sign of edge functions.
    """

    a: np.ndarray
    b: np.ndarray
    d: np.ndarray

    def local(self, t: int, i: int) -> LocalQuadratic:
        return LocalQuadratic(float(self.a[t, i]), self.b[t, i].copy(), float(self.d[t, i]))


def basis_arrays(
    geom: MeshGeometry,
    K: DiffusionTensor,
    space: Space | str,
    velocity: DiscreteVelocity | None = None,
) -> BasisArrays:
    space = Space(space)
    nt = len(geom.areas)
    a = np.zeros((nt, 4))
    b = np.zeros((nt, 4, 2))
    d = np.zeros((nt, 4))
    a[:, :3] = 1.0 / geom.heights
    b[:, :3] = -geom.vertices * a[:, :3, None]
    d[:, :3] = -quadratic_mean(K, geom.vertices, a[:, :3], b[:, :3])

    if space is not Space.U and velocity is None:
        raise ValueError(f"space {space.value} needs a velocity")
    if space is Space.U:
        d[:, 3] = 1.0
    elif space is Space.V:
        wh = velocity.constant()
        b[:, 3] = -wh
        d[:, 3] = 1.0 + np.einsum("ti,ij,tj->t", geom.centroids, K.inverse, wh)
    else:
        a_w, b_w = velocity.rt0()
        a[:, 3] = a_w
        b[:, 3] = b_w
        d[:, 3] = 1.0 - quadratic_mean(K, geom.vertices, a_w, b_w)
    return BasisArrays(a, b, d)


def _single(tri: TriangleGeometry) -> MeshGeometry:
    return MeshGeometry(
        vertices=tri.vertices[None],
        areas=np.array([tri.area]),
        centroids=tri.centroid[None],
        face_lengths=tri.face_lengths[None],
        normals=tri.normals[None],
        heights=tri.heights[None],
        signs=tri.signs[None],
    )


def _single_velocity(space: Space, velocity) -> DiscreteVelocity | None:
    if velocity is None or isinstance(velocity, DiscreteVelocity):
        return velocity
    if space is Space.V:
        return DiscreteVelocity(VelocityMode.CENTROID_P0, np.asarray(velocity, float).reshape(1, 2))
    a_w, b_w = velocity
    return DiscreteVelocity(
        VelocityMode.RT0, (np.array([float(a_w)]), np.asarray(b_w, float).reshape(1, 2))
    )


def local_basis(
    tri: TriangleGeometry, K: DiffusionTensor, space: Space | str = Space.U, velocity=None
) -> list[LocalQuadratic]:
    """The four local basis functions of ``space`` on one triangle.

    ``velocity`` is the constant w_h (2-vector) for V, the RT0 pair
    (a_w, b_w) for W, and ignored for U.
    """
    space = Space(space)
    arrs = basis_arrays(_single(tri), K, space, _single_velocity(space, velocity))
    return [arrs.local(0, i) for i in range(4)]


def dof_functionals(
    tri: TriangleGeometry,
    K: DiffusionTensor,
    space: Space | str,
    v: LocalQuadratic,
    velocity=None,
    n_gauss: int = 3,
) -> np.ndarray:
    """Edge functionals (w.r.t. outward normals) and the mean, by quadrature.

    Returns [F_0, F_1, F_2, mean]. Independent of the closed forms used to
    build bases: the flux is integrated along each edge with Gauss points
    and the mean comes from a triangle rule.
    """
    from .geometry import map_points, quadrature_rule

    space = Space(space)
    rule = quadrature_rule(4)
    vals, _, _ = v.evaluate(K, map_points(tri.vertices, rule))
    mean = float(rule.weights @ vals)
    s, ws = gauss_segment(n_gauss)
    out = np.empty(4)
    for i in range(3):
        xa, xb = tri.vertices[(i + 1) % 3], tri.vertices[(i + 2) % 3]
        pts = xa + s[:, None] * (xb - xa)
        flux = v.flux(pts)
        if space is Space.V:
            flux = flux + np.asarray(velocity, float) * mean
        elif space is Space.W:
            a_w, b_w = velocity
            flux = flux - (a_w * pts + np.asarray(b_w, float)) * mean
        out[i] = ws @ (flux @ tri.normals[i])
    out[3] = mean
    return out


def recover_local(
    tri: TriangleGeometry,
    K: DiffusionTensor,
    space: Space | str,
    velocity,
    edge_dof_values,
    cell_mean: float,
) -> LocalQuadratic:
    """Local function whose edge functionals (global normals) and mean are given.

    The diffusive flux is fixed first by the RT0 reconstruction from the
    outward edge means with the velocity contribution removed, then ``d``
    from the mean.
    """
    space = Space(space)
    outward = tri.signs * np.asarray(edge_dof_values, dtype=float)
    if space is Space.V:
        outward = outward - cell_mean * (tri.normals @ np.asarray(velocity, float))
    elif space is Space.W:
        a_w, b_w = velocity
        w_dot_n = a_w * np.einsum("kd,kd->k", tri.vertices[[1, 2, 0]], tri.normals) + tri.normals @ np.asarray(b_w, float)
        outward = outward + cell_mean * w_dot_n
    geom = _single(tri)
    a, b = rt0_from_edge_fluxes(geom, outward[None])
    d = cell_mean - quadratic_mean(K, geom.vertices, a, b)[0]
    return LocalQuadratic(float(a[0]), b[0], float(d))


# ---------------------------------------------------------------- fields


@dataclass(frozen=True, eq=False)
class HermiteField:
    """A piecewise quadratic of the local form, one coefficient triple per triangle."""

    a: np.ndarray  # (nt,)
    b: np.ndarray  # (nt, 2)
    d: np.ndarray  # (nt,)

    def local(self, t: int) -> LocalQuadratic:
        return LocalQuadratic(float(self.a[t]), self.b[t].copy(), float(self.d[t]))

    @classmethod
    def uniform(cls, nt: int, a: float, b, d: float) -> "HermiteField":
        return cls(np.full(nt, float(a)), np.tile(np.asarray(b, float), (nt, 1)), np.full(nt, float(d)))

    def evaluate(self, K: DiffusionTensor, x: np.ndarray):
        """Values, gradients, div(K grad) at per-element points x (nt, nq, 2)."""
        flux = self.a[:, None, None] * x + self.b[:, None, :]
        grad = flux @ K.inverse.T
        half = 0.5 * self.a[:, None, None] * x + self.b[:, None, :]
        value = np.einsum("tqi,tqi->tq", x, half @ K.inverse.T) + self.d[:, None]
        return value, grad, 2.0 * self.a

    def means(self, K: DiffusionTensor, geom: MeshGeometry) -> np.ndarray:
        return quadratic_mean(K, geom.vertices, self.a, self.b) + self.d


def combine(basis: BasisArrays, local_dofs: np.ndarray) -> HermiteField:
    """Field sum_i local_dofs[t, i] * basis_i on every triangle."""
    return HermiteField(
        np.einsum("ti,ti->t", local_dofs, basis.a),
        np.einsum("ti,tid->td", local_dofs, basis.b),
        np.einsum("ti,ti->t", local_dofs, basis.d),
    )


# ---------------------------------------------------------------- dof map


@dataclass(frozen=True, eq=False)
class DofMap:
    """Edges first (mesh order), then triangles.

    ``element_dofs[t]`` lists the global indices of the four local functions
    and ``element_signs[t]`` the factor turning a local basis function into
    the restriction of the global one.
    """

    n_edges: int
    n_cells: int
    element_dofs: np.ndarray
    element_signs: np.ndarray
    constrained: np.ndarray

    @property
    def total(self) -> int:
        return self.n_edges + self.n_cells

    def cell_dof(self, t) -> np.ndarray:
        return self.n_edges + np.asarray(t)

    def local_values(self, x: np.ndarray) -> np.ndarray:
        """Local (sign-applied) DOF values per element, shape (nt, 4)."""
        return self.element_signs * np.asarray(x)[self.element_dofs]


def dof_map(mesh: Mesh, geom: MeshGeometry | None = None) -> DofMap:
    geom = mesh_geometry(mesh) if geom is None else geom
    nt, ne = mesh.n_triangles, mesh.n_edges
    element_dofs = np.column_stack([mesh.triangle_edges, ne + np.arange(nt)])
    element_signs = np.column_stack([geom.signs, np.ones(nt)])
    return DofMap(
        n_edges=ne,
        n_cells=nt,
        element_dofs=element_dofs,
        element_signs=element_signs,
        constrained=mesh.edges_with_marker(Marker.FLUX_ZERO),
    )


def extract_dofs(
    field: HermiteField,
    mesh: Mesh,
    K: DiffusionTensor,
    space: Space | str,
    velocity: DiscreteVelocity | None = None,
    geom: MeshGeometry | None = None,
) -> np.ndarray:
    """Global DOF vector of a field whose edge functionals are single valued.

    Edge values are taken from the first adjacent triangle.
    """
    space = Space(space)
    geom = mesh_geometry(mesh) if geom is None else geom
    means = field.means(K, geom)
    mid = geom.vertices[:, [1, 2, 0]]  # a point on each face i
    flux_n = field.a[:, None] * np.einsum("tkd,tkd->tk", mid, geom.normals) + np.einsum(
        "td,tkd->tk", field.b, geom.normals
    )
    if space is Space.V:
        flux_n = flux_n + means[:, None] * np.einsum("td,tkd->tk", velocity.constant(), geom.normals)
    elif space is Space.W:
        a_w, b_w = velocity.rt0()
        w_n = a_w[:, None] * np.einsum("tkd,tkd->tk", mid, geom.normals) + np.einsum(
            "td,tkd->tk", b_w, geom.normals
        )
        flux_n = flux_n - means[:, None] * w_n
    x = np.empty(mesh.n_edges + mesh.n_triangles)
    first = mesh.edge_triangles[:, 0]
    local_index = np.argmax(mesh.triangle_edges[first] == np.arange(mesh.n_edges)[:, None], axis=1)
    x[: mesh.n_edges] = (geom.signs * flux_n)[first, local_index]
    x[mesh.n_edges :] = means
    return x
