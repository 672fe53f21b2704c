import math

import numpy as np
import pytest
import scipy.linalg as sla
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hermite_cd.analysis import (
    MAX_INFSUP_DOFS,
    ErrorReport,
    GramError,
    convergence_rates,
    error_norms,
    h_norm,
    h_norm_gram,
    infsup_estimate,
    infsup_from_matrices,
)
from hermite_cd.assembly import DiscreteSolution, Method
from hermite_cd.geometry import mesh_geometry
from hermite_cd.hermite import DiffusionTensor, HermiteField, Space, basis_arrays, combine, dof_map
from hermite_cd.mesh import build_quarter_disk_mesh, build_square_mesh
from hermite_cd.mixed import MixedSolution, RT0Function
from hermite_cd.problems import _square_problem, builtin_problem


def test_exact_field_has_zero_errors():
    mesh = build_quarter_disk_mesh(4)
    prob = builtin_problem(2, 3.0)
    field = HermiteField.uniform(mesh.n_triangles, -0.5, [0.0, 0.0], 0.25)
    sol = DiscreteSolution(Method.HA, np.zeros(3), field=field)
    rep = error_norms(sol, prob, mesh)
    for col in ("e_u_l2", "e_grad_l2", "e_divflux_l2", "e_max_centroid"):
        assert getattr(rep, col) <= 1e-12
    assert rep.h == mesh.h and rep.dofs == 3


def test_zero_solution_errors_are_norms_of_u():
    # against an exact symbolic value: ||u||, ||grad u||, ||lap u|| on the square
    x, y = sp.symbols("x y")
    u = (x - x**2) * (y - y**2) / 4
    integ = lambda e: float(sp.integrate(e, (x, 0, 1), (y, 0, 1)))  # noqa: E731
    gu = sp.diff(u, x) ** 2 + sp.diff(u, y) ** 2
    lap = sp.diff(u, x, 2) + sp.diff(u, y, 2)
    mesh = build_square_mesh(4)
    prob = builtin_problem(1, 1.0)
    field = HermiteField.uniform(mesh.n_triangles, 0.0, [0.0, 0.0], 0.0)
    rep = error_norms(DiscreteSolution(Method.HA, np.zeros(1), field=field), prob, mesh)
    assert rep.e_u_l2 == pytest.approx(math.sqrt(integ(u**2)), rel=1e-12)
    assert rep.e_grad_l2 == pytest.approx(math.sqrt(integ(gu)), rel=1e-12)
    assert rep.e_divflux_l2 == pytest.approx(math.sqrt(integ(lap**2)), rel=1e-12)


def test_mixed_error_fields():
    # p = -grad u exactly for u = (1 - r^2)/4 means p = x/2, an RT0 field
    mesh = build_quarter_disk_mesh(4)
    prob = builtin_problem(2, 1.0)
    g = mesh_geometry(mesh)
    mid = 0.5 * (mesh.vertices[mesh.edge_vertices[:, 0]] + mesh.vertices[mesh.edge_vertices[:, 1]])
    fluxes = np.einsum("ed,ed->e", mid / 2, mesh.edge_normals)
    cells = prob.u(g.centroids)
    sol = DiscreteSolution(Method.A, np.zeros(1), mixed=MixedSolution(RT0Function(fluxes), cells))
    rep = error_norms(sol, prob, mesh)
    assert rep.e_grad_l2 < 1e-13 and rep.e_divflux_l2 < 1e-13
    assert rep.e_max_centroid < 1e-15
    assert rep.e_u_l2 > 1e-3


def test_h_norm_simple_fields():
    mesh = build_square_mesh(3)
    K = DiffusionTensor.identity()
    one = HermiteField.uniform(mesh.n_triangles, 0.0, [0.0, 0.0], 1.0)
    assert h_norm(one, mesh, K) == pytest.approx(1.0)
    lin = HermiteField.uniform(mesh.n_triangles, 0.0, [1.0, 0.0], 0.0)  # v = x
    # means of x per triangle, plus |grad|^2 = 1
    g = mesh_geometry(mesh)
    expected = np.sum(g.areas * g.centroids[:, 0] ** 2) + 1.0
    assert h_norm(lin, mesh, K) == pytest.approx(math.sqrt(expected))
    quad = HermiteField.uniform(mesh.n_triangles, -0.5, [0.0, 0.0], 0.25)
    means = quad.means(K, g)
    # int |x/2|^2 over the unit square is 1/6; div grad = -1
    expected = np.sum(g.areas * means**2) + 1 / 6 + 1.0
    assert h_norm(quad, mesh, K) == pytest.approx(math.sqrt(expected), rel=1e-13)


def test_h_norm_gram_consistent_with_h_norm():
    mesh = build_quarter_disk_mesh(3)
    K = DiffusionTensor(np.array([[1.2, 0.1], [0.1, 0.9]]))
    g = mesh_geometry(mesh)
    dm = dof_map(mesh, g)
    M = h_norm_gram(mesh, K, Space.U)
    x = np.random.default_rng(0).normal(size=dm.total)
    field = combine(basis_arrays(g, K, Space.U), dm.local_values(x))
    assert math.sqrt(x @ M @ x) == pytest.approx(h_norm(field, mesh, K), rel=1e-12)
    np.testing.assert_allclose(M, M.T, atol=1e-14)


def _reports(errors, Ls=(8, 16, 32, 64)):
    return [ErrorReport(1.0 / L, *e, dofs=L) for L, e in zip(Ls, errors)]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.5, 3.0), min_size=4, max_size=4), st.floats(1e-3, 1e3))
def test_rates_of_power_laws(orders, C):
    Ls = (8, 16, 32, 64)
    errors = [[C * (1.0 / L) ** p for p in orders] for L in Ls]
    table = convergence_rates(_reports(errors, Ls))
    assert len(table.rates) == 3
    for row in table.rates:
        for p, col in zip(orders, ("e_u_l2", "e_grad_l2", "e_divflux_l2", "e_max_centroid")):
            assert row[col] == pytest.approx(p, abs=1e-9)


def test_rates_edge_cases():
    table = convergence_rates(_reports([[0.0, 1.0, 1.0, 1.0], [0.0, 0.5, 2.0, 1.0]], (8, 16)))
    assert table.rates[0]["e_u_l2"] is None
    assert table.rates[0]["e_grad_l2"] == pytest.approx(1.0)
    assert table.rates[0]["e_divflux_l2"] == pytest.approx(-1.0)
    assert table.column("e_max_centroid") == [0.0]
    with pytest.raises(ValueError):
        convergence_rates(_reports([[1, 1, 1, 1]], (8,)))


def test_infsup_from_matrices_matches_generalized_eigenproblem():
    rng = np.random.default_rng(3)
    n = 7
    A = rng.normal(size=(n, n))
    R1, R2 = rng.normal(size=(n, n)), rng.normal(size=(n, n))
    Mu, Mv = R1 @ R1.T + n * np.eye(n), R2 @ R2.T + n * np.eye(n)
    # min_u max_v (v^T A u)^2 / (|u|^2 |v|^2) is the smallest eigenvalue of
    # A^T Mv^-1 A u = lam Mu u
    lam = sla.eigh(A.T @ np.linalg.solve(Mv, A), Mu, eigvals_only=True)
    assert infsup_from_matrices(A, Mu, Mv) == pytest.approx(math.sqrt(lam.min()), rel=1e-10)
    assert infsup_from_matrices(A, np.eye(n), np.eye(n)) == pytest.approx(np.linalg.svd(A)[1].min())
    with pytest.raises(GramError):
        infsup_from_matrices(A, -np.eye(n), np.eye(n))


def test_infsup_estimate_positive_and_guarded():
    prob = _square_problem(0.0)
    a2 = infsup_estimate(build_square_mesh(2), prob.K, prob.w)
    a4 = infsup_estimate(build_square_mesh(4), prob.K, prob.w)
    assert a2 > 0 and a4 > 0
    assert abs(a2 - a4) / a2 < 0.2
    big = int(math.sqrt(MAX_INFSUP_DOFS / 4)) + 2
    with pytest.raises(ValueError):
        infsup_estimate(build_square_mesh(big), prob.K, prob.w)
