"""Error measures, the working h-norm, observed orders and a discrete inf-sup probe."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .assembly import DiscreteSolution, FirstTerm, Method, assemble_method_hA, element_data
from .geometry import MeshGeometry, map_points, mesh_geometry, quadrature_rule
from .hermite import (
    BasisArrays,
    DiffusionTensor,
    HermiteField,
    Space,
    VelocityMode,
    basis_arrays,
    dof_map,
    interpolate_velocity,
    quadratic_mean,
)
from .mesh import Mesh
from .problems import ProblemSpec
from .system import apply_flux_bc

ERROR_COLUMNS = ("e_u_l2", "e_grad_l2", "e_divflux_l2", "e_max_centroid")


@dataclass(frozen=True)
class ErrorReport:
    h: float
    e_u_l2: float
    e_grad_l2: float
    e_divflux_l2: float
    e_max_centroid: float
    dofs: int

    def as_dict(self) -> dict:
        return asdict(self)


def _mixed_fields(solution: DiscreteSolution, problem: ProblemSpec, mesh: Mesh, geom: MeshGeometry, x, xc):
    """u_h, grad u_h, div K grad u_h for the mixed methods at points x, plus centroid values."""
    K = problem.K
    c, e = solution.mixed.p.element_coefficients(mesh, geom)
    u_t = solution.mixed.u
    p = c[:, None, None] * x + e[:, None, :]
    u_h = np.broadcast_to(u_t[:, None], x.shape[:2])
    if solution.method is Method.A:
        # p approximates -K grad u
        grad = -(p @ K.inverse.T)
        divflux = np.broadcast_to(-2.0 * c[:, None], x.shape[:2])
    else:
        # p approximates -K grad u + w u
        wx = problem.w(x)
        grad = (wx * u_h[..., None] - p) @ K.inverse.T
        divflux = -2.0 * c[:, None] + problem.div_w(x) * u_h + np.einsum("tqd,tqd->tq", wx, grad)
    return u_h, grad, divflux, u_t


def error_norms(
    solution: DiscreteSolution, problem: ProblemSpec, mesh: Mesh, quad_degree: int = 10
) -> ErrorReport:
    """L2 errors of u, grad u, div K grad u (element-wise) and the centroid maximum."""
    geom = mesh_geometry(mesh)
    rule = quadrature_rule(quad_degree)
    x = map_points(geom.vertices, rule)
    wq = geom.areas[:, None] * rule.weights
    xc = geom.centroids
    if solution.field is not None:
        u_h, grad, divflux = solution.field.evaluate(problem.K, x)
        divflux = np.broadcast_to(divflux[:, None], x.shape[:2])
        u_c = solution.field.evaluate(problem.K, xc[:, None, :])[0][:, 0]
    else:
        u_h, grad, divflux, u_c = _mixed_fields(solution, problem, mesh, geom, x, xc)

    def l2(diff):
        return math.sqrt(float(np.einsum("tq,tq->", wq, diff)))

    return ErrorReport(
        h=mesh.h,
        e_u_l2=l2((problem.u(x) - u_h) ** 2),
        e_grad_l2=l2(np.sum((problem.grad_u(x) - grad) ** 2, axis=-1)),
        e_divflux_l2=l2((problem.divflux_u(x) - divflux) ** 2),
        e_max_centroid=float(np.max(np.abs(problem.u(xc) - u_c))),
        dofs=len(solution.dofs),
    )


def h_norm(field: HermiteField, mesh: Mesh, K: DiffusionTensor) -> float:
    """sqrt((Pi_h v, Pi_h v) + sum_T |grad v|^2_T + |div K grad v|^2_T)."""
    geom = mesh_geometry(mesh)
    rule = quadrature_rule(2)
    x = map_points(geom.vertices, rule)
    _, grad, divflux = field.evaluate(K, x)
    means = field.means(K, geom)
    total = np.sum(geom.areas * means**2)
    total += np.einsum("t,q,tqd,tqd->", geom.areas, rule.weights, grad, grad)
    total += np.sum(geom.areas * divflux**2)
    return math.sqrt(float(total))


def _gram_local(geom: MeshGeometry, K: DiffusionTensor, basis: BasisArrays) -> np.ndarray:
    rule = quadrature_rule(2)
    x = map_points(geom.vertices, rule)
    flux = basis.a[:, :, None, None] * x[:, None] + basis.b[:, :, None, :]
    grad = flux @ K.inverse.T
    means = quadratic_mean(K, geom.vertices, basis.a, basis.b) + basis.d
    G = np.einsum("t,ti,tj->tij", geom.areas, means, means)
    G += np.einsum("t,q,tiqd,tjqd->tij", geom.areas, rule.weights, grad, grad)
    G += np.einsum("t,ti,tj->tij", geom.areas, 2 * basis.a, 2 * basis.a)
    return G


def h_norm_gram(mesh: Mesh, K: DiffusionTensor, space: Space | str, velocity=None) -> np.ndarray:
    """Dense Gram matrix of the h-norm inner product over the global basis of a space."""
    geom = mesh_geometry(mesh)
    dm = dof_map(mesh, geom)
    local = _gram_local(geom, K, basis_arrays(geom, K, space, velocity))
    s = dm.element_signs
    M = np.zeros((dm.total, dm.total))
    rows = np.repeat(dm.element_dofs[:, :, None], 4, axis=2)
    cols = np.repeat(dm.element_dofs[:, None, :], 4, axis=1)
    np.add.at(M, (rows, cols), s[:, :, None] * s[:, None, :] * local)
    return M


@dataclass(frozen=True)
class RateTable:
    """Observed orders log2(e_coarse / e_fine) per consecutive pair; None if undefined."""

    pairs: list[tuple[float, float]]
    rates: list[dict[str, float | None]]

    def column(self, name: str) -> list[float | None]:
        return [r[name] for r in self.rates]


def convergence_rates(reports: Sequence[ErrorReport], columns=ERROR_COLUMNS) -> RateTable:
    if len(reports) < 2:
        raise ValueError("need at least two reports")
    pairs, rates = [], []
    for coarse, fine in zip(reports[:-1], reports[1:]):
        pairs.append((coarse.h, fine.h))
        row = {}
        for col in columns:
            ec, ef = getattr(coarse, col), getattr(fine, col)
            row[col] = math.log2(ec / ef) if ec > 0 and ef > 0 else None
        rates.append(row)
    return RateTable(pairs, rates)


class GramError(ValueError):
    """The h-norm Gram matrix is not positive definite."""


MAX_INFSUP_DOFS = 2000


def infsup_from_matrices(A: np.ndarray, M_trial: np.ndarray, M_test: np.ndarray) -> float:
    """Smallest singular value of L_test^{-1} A L_trial^{-T}, with M = L L^T.

    Equals min_u max_v v^T A u / (|u|_{M_trial} |v|_{M_test}); rows of A are
    test functions.
    """
    try:
        Lu = np.linalg.cholesky(M_trial)
        Lv = np.linalg.cholesky(M_test)
    except np.linalg.LinAlgError as exc:
        raise GramError("h-norm Gram matrix is not positive definite") from exc
    B = sla.solve_triangular(Lv, np.asarray(A, dtype=float), lower=True)
    B = sla.solve_triangular(Lu, B.T, lower=True).T
    return float(np.linalg.svd(B, compute_uv=False).min())


def infsup_estimate(
    mesh: Mesh,
    K: DiffusionTensor,
    w: Callable[[np.ndarray], np.ndarray],
    form: FirstTerm | str = FirstTerm.P1,
) -> float:
    """Discrete inf-sup constant of the hA form (``P1``) or its exact-velocity variant."""
    geom = mesh_geometry(mesh)
    dm = dof_map(mesh, geom)
    if dm.total - len(dm.constrained) > MAX_INFSUP_DOFS:
        raise ValueError(f"{dm.total} DOFs exceed the dense inf-sup guard of {MAX_INFSUP_DOFS}")
    zero = lambda x: np.zeros(np.shape(x)[:-1])  # noqa: E731
    system = apply_flux_bc(assemble_method_hA(mesh, K, w, zero, first_term=form), dm)
    keep = system.free
    wh = interpolate_velocity(w, mesh, VelocityMode.CENTROID_P0, geom)
    M_U = h_norm_gram(mesh, K, Space.U)[np.ix_(keep, keep)]
    M_V = h_norm_gram(mesh, K, Space.V, wh)[np.ix_(keep, keep)]
    return infsup_from_matrices(system.matrix.toarray(), M_U, M_V)
