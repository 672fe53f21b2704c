"""Petrov-Galerkin assembly of the Hermite methods and solution reconstruction.

Method hA (trial U_h, test V_h):

    sum_T (div K grad u - w1_h . grad u, Pi_T v)_T
          + (grad u, K grad v + w_h Pi_T v)_T + (u, div K grad v)_T = -(f, Pi_h v)

Method hB (trial W_h, test U_h):

    sum_T (div K grad u, v)_T + (grad u, K grad v)_T + (u, div K grad v)_T = -(f, Pi_h v)

Dirichlet data is natural: u = g adds SIGN * (g, K grad v . n) on boundary
edges to the right-hand side, which is zero for g = None. Only zero-flux
edges are eliminated (see :func:`hermite_cd.system.apply_flux_bc`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .geometry import (
    MeshGeometry,
    QuadratureRule,
    dirichlet_edge_integrals,
    map_points,
    mesh_geometry,
    quadrature_rule,
)
from .hermite import (
    BasisArrays,
    DiffusionTensor,
    DiscreteVelocity,
    DofMap,
    HermiteField,
    Space,
    VelocityMode,
    basis_arrays,
    combine,
    dof_map,
    interpolate_velocity,
    quadratic_mean,
)
from .mesh import Mesh
from .mixed import MixedSolution, split_solution
from .system import LinearSystem

Field = Callable[[np.ndarray], np.ndarray]


class Method(str, Enum):
    A = "A"
    HA = "hA"
    B = "B"
    HB = "hB"

    @property
    def is_hermite(self) -> bool:
        return self in (Method.HA, Method.HB)


class FirstTerm(str, Enum):
    """Velocity in the (w . grad u, Pi_T v) term of method hA."""

    P1 = "P1"  # vertex-interpolated w1_h: the method itself
    EXACT = "exact"  # exact w: the auxiliary form used in the stability analysis


@dataclass(frozen=True, eq=False)
class ElementData:
    """Everything an element kernel needs, evaluated once per mesh."""

    geom: MeshGeometry
    rule: QuadratureRule
    x: np.ndarray  # (nt, nq, 2) quadrature points
    wq: np.ndarray  # (nt, nq) weights times area


def element_data(mesh: Mesh, quad_degree: int = 6, geom: MeshGeometry | None = None) -> ElementData:
    geom = mesh_geometry(mesh) if geom is None else geom
    rule = quadrature_rule(quad_degree)
    return ElementData(geom, rule, map_points(geom.vertices, rule), geom.areas[:, None] * rule.weights)


def _eval(K: DiffusionTensor, a, b, d, x):
    """Values, gradients and fluxes of (nt, m) coefficient sets at x (nt, nq, 2)."""
    flux = a[:, :, None, None] * x[:, None] + b[:, :, None, :]
    grad = flux @ K.inverse.T
    half = 0.5 * a[:, :, None, None] * x[:, None] + b[:, :, None, :]
    val = np.einsum("tqi,tmqi->tmq", x, half @ K.inverse.T) + d[:, :, None]
    return val, grad, flux


def _means(K: DiffusionTensor, geom: MeshGeometry, basis: BasisArrays) -> np.ndarray:
    return quadratic_mean(K, geom.vertices, basis.a, basis.b) + basis.d


def hA_local(
    ed: ElementData,
    K: DiffusionTensor,
    test: BasisArrays,
    trial: BasisArrays,
    w_first: np.ndarray,
    w_centroid: np.ndarray,
) -> np.ndarray:
    """Local matrices (nt, n_test, n_trial) of the hA form.

    ``w_first`` is the velocity of the first term at the quadrature points,
    ``w_centroid`` the element-wise constant w_h.
    """
    sv, sg, sflux = _eval(K, test.a, test.b, test.d, ed.x)
    rv, rg, _ = _eval(K, trial.a, trial.b, trial.d, ed.x)
    pi_v = _means(K, ed.geom, test)
    first = 2.0 * trial.a[:, :, None] - np.einsum("tqd,tjqd->tjq", w_first, rg)
    A = np.einsum("tq,tjq,ti->tij", ed.wq, first, pi_v)
    test_flux = sflux + pi_v[:, :, None, None] * w_centroid[:, None, None, :]
    A += np.einsum("tq,tjqd,tiqd->tij", ed.wq, rg, test_flux)
    A += np.einsum("tq,tjq,ti->tij", ed.wq, rv, 2.0 * test.a)
    return A


def hB_local(ed: ElementData, K: DiffusionTensor, test: BasisArrays, trial: BasisArrays) -> np.ndarray:
    sv, sg, sflux = _eval(K, test.a, test.b, test.d, ed.x)
    rv, rg, _ = _eval(K, trial.a, trial.b, trial.d, ed.x)
    A = np.einsum("tq,tj,tiq->tij", ed.wq, 2.0 * trial.a, sv)
    A += np.einsum("tq,tjqd,tiqd->tij", ed.wq, rg, sflux)
    A += np.einsum("tq,tjq,ti->tij", ed.wq, rv, 2.0 * test.a)
    return A


def _load(ed: ElementData, K: DiffusionTensor, test: BasisArrays, f: Field) -> np.ndarray:
    fint = np.einsum("tq,tq->t", ed.wq, np.asarray(f(ed.x), dtype=float))
    return -_means(K, ed.geom, test) * fint[:, None]


SIGN = 1.0


def _boundary_load(mesh: Mesh, dm: DofMap, g: Field | None) -> np.ndarray:
    # edge DOFs come first and share the edge numbering
    out = np.zeros(dm.total)
    out[: mesh.n_edges] = SIGN * dirichlet_edge_integrals(mesh, g)
    return out


def _scatter(dm: DofMap, local: np.ndarray, local_rhs: np.ndarray, extra: np.ndarray | None = None) -> LinearSystem:
    s = dm.element_signs
    vals = s[:, :, None] * s[:, None, :] * local
    rows = np.repeat(dm.element_dofs[:, :, None], 4, axis=2)
    cols = np.repeat(dm.element_dofs[:, None, :], 4, axis=1)
    rhs = np.zeros(dm.total)
    np.add.at(rhs, dm.element_dofs.ravel(), (s * local_rhs).ravel())
    if extra is not None:
        rhs += extra
    return LinearSystem.from_triplets(rows, cols, vals, rhs, dm.total)


def hA_velocities(
    mesh: Mesh, w: Field, ed: ElementData, first_term: FirstTerm | str = FirstTerm.P1
) -> tuple[DiscreteVelocity, np.ndarray]:
    first_term = FirstTerm(first_term)
    wh = interpolate_velocity(w, mesh, VelocityMode.CENTROID_P0, ed.geom)
    if first_term is FirstTerm.P1:
        w_first = interpolate_velocity(w, mesh, VelocityMode.VERTEX_P1, ed.geom).at(
            ed.rule.points, ed.geom.vertices
        )
    else:
        w_first = np.asarray(w(ed.x), dtype=float)
    return wh, w_first


def assemble_method_hA(
    mesh: Mesh,
    K: DiffusionTensor,
    w: Field,
    f: Field,
    first_term: FirstTerm | str = FirstTerm.P1,
    quad_degree: int = 6,
    g: Field | None = None,
) -> LinearSystem:
    ed = element_data(mesh, quad_degree)
    wh, w_first = hA_velocities(mesh, w, ed, first_term)
    test = basis_arrays(ed.geom, K, Space.V, wh)
    trial = basis_arrays(ed.geom, K, Space.U)
    local = hA_local(ed, K, test, trial, w_first, wh.constant())
    dm = dof_map(mesh, ed.geom)
    return _scatter(dm, local, _load(ed, K, test, f), _boundary_load(mesh, dm, g))


def assemble_method_hB(
    mesh: Mesh,
    K: DiffusionTensor,
    w: Field,
    f: Field,
    quad_degree: int = 6,
    g: Field | None = None,
) -> LinearSystem:
    ed = element_data(mesh, quad_degree)
    wt = interpolate_velocity(w, mesh, VelocityMode.RT0, ed.geom)
    test = basis_arrays(ed.geom, K, Space.U)
    trial = basis_arrays(ed.geom, K, Space.W, wt)
    local = hB_local(ed, K, test, trial)
    dm = dof_map(mesh, ed.geom)
    return _scatter(dm, local, _load(ed, K, test, f), _boundary_load(mesh, dm, g))


def hA_residual(
    mesh: Mesh,
    K: DiffusionTensor,
    w: Field,
    f: Field,
    u: HermiteField,
    first_term: FirstTerm | str = FirstTerm.EXACT,
    quad_degree: int = 6,
    g: Field | None = None,
) -> np.ndarray:
    """L_h(v) - a_h(u, v) for every global test basis function v.

    ``u`` need not belong to U_h; any element-wise quadratic of the local
    form is accepted, which is how consistency of the exact solution is
    checked.
    """
    ed = element_data(mesh, quad_degree)
    wh, w_first = hA_velocities(mesh, w, ed, first_term)
    test = basis_arrays(ed.geom, K, Space.V, wh)
    trial = BasisArrays(u.a[:, None], u.b[:, None, :], u.d[:, None])
    action = hA_local(ed, K, test, trial, w_first, wh.constant())[:, :, 0]
    dm = dof_map(mesh, ed.geom)
    out = _boundary_load(mesh, dm, g)
    np.add.at(out, dm.element_dofs.ravel(), (dm.element_signs * (_load(ed, K, test, f) - action)).ravel())
    return out


@dataclass(frozen=True, eq=False)
class DiscreteSolution:
    method: Method
    dofs: np.ndarray
    field: HermiteField | None = None
    mixed: MixedSolution | None = None


def reconstruct(
    mesh: Mesh,
    dofs: np.ndarray,
    method: Method | str,
    K: DiffusionTensor,
    w: Field | None = None,
) -> DiscreteSolution:
    """Element-wise representation of a solved DOF vector.

    Hermite methods need ``w`` only for hB, whose trial space depends on the
    RT0 velocity.
    """
    method = Method(method)
    dofs = np.asarray(dofs, dtype=float)
    if not method.is_hermite:
        return DiscreteSolution(method, dofs, mixed=split_solution(mesh, dofs))
    geom = mesh_geometry(mesh)
    dm = dof_map(mesh, geom)
    if method is Method.HA:
        basis = basis_arrays(geom, K, Space.U)
    else:
        if w is None:
            raise ValueError("method hB needs the velocity to rebuild W_h")
        basis = basis_arrays(geom, K, Space.W, interpolate_velocity(w, mesh, VelocityMode.RT0, geom))
    return DiscreteSolution(method, dofs, field=combine(basis, dm.local_values(dofs)))
