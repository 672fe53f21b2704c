import numpy as np
import pytest
import sympy as sp

from hermite_cd.analysis import error_norms
from hermite_cd.assembly import Method, reconstruct
from hermite_cd.geometry import gauss_segment, mesh_geometry, triangle_geometry
from hermite_cd.hermite import DiffusionTensor, dof_map
from hermite_cd.mesh import build_quarter_disk_mesh, build_square_mesh
from hermite_cd.mixed import RT0Function, assemble_method_A, assemble_method_B, rt0_basis
from hermite_cd.problems import builtin_problem
from hermite_cd.system import apply_flux_bc, solve


def test_rt0_basis_edge_means():
    tri = triangle_geometry([[0.0, 0.0], [2.0, 0.5], [0.3, 1.1]], signs=[1.0, -1.0, 1.0])
    s, w = gauss_segment(2)
    for j, (c, e) in enumerate(rt0_basis(tri)):
        for k in range(3):
            a, b = tri.vertices[(k + 1) % 3], tri.vertices[(k + 2) % 3]
            pts = a + s[:, None] * (b - a)
            mean = w @ ((c * pts + e) @ tri.normals[k])
            assert mean == pytest.approx(tri.signs[j] if j == k else 0.0, abs=1e-14)
        # divergence integrates to the signed edge length
        assert 2 * c * tri.area == pytest.approx(tri.signs[j] * tri.face_lengths[j])


def test_mass_matrix_against_symbolic_oracle():
    # one triangle, K = diag(2, 1): int K^-1 q_i . q_j, computed exactly
    verts = [(0, 0), (1, 0), (0, 1)]
    x, y, s, t = sp.symbols("x y s t")
    Kinv = sp.diag(sp.Rational(1, 2), 1)
    P = [sp.Matrix(v) for v in verts]
    heights = [2 * sp.Rational(1, 2) / sp.sqrt((P[(i + 1) % 3] - P[(i + 2) % 3]).dot(P[(i + 1) % 3] - P[(i + 2) % 3])) for i in range(3)]
    X = sp.Matrix([x, y])
    q = [(X - P[i]) / heights[i] for i in range(3)]
    M = sp.zeros(3, 3)
    for i in range(3):
        for j in range(3):
            expr = (q[i].T * Kinv * q[j])[0]
            M[i, j] = sp.integrate(sp.integrate(expr, (y, 0, 1 - x)), (x, 0, 1))
    from hermite_cd.mesh import build_edge_topology

    mesh = build_edge_topology(np.array(verts, float), np.array([[0, 1, 2]]))
    K = DiffusionTensor(np.diag([2.0, 1.0]))
    sys_ = assemble_method_A(mesh, K, lambda p: np.zeros(p.shape), lambda p: np.zeros(p.shape[:-1]))
    g = mesh_geometry(mesh)
    E = mesh.triangle_edges[0]
    sgn = g.signs[0]
    A = sys_.matrix.toarray()[np.ix_(E, E)] * np.outer(sgn, sgn)
    np.testing.assert_allclose(A, np.array(M.evalf(), dtype=float), rtol=1e-13)


def test_methods_coincide_without_convection():
    mesh = build_square_mesh(3)
    K = DiffusionTensor.identity()
    zero = lambda p: np.zeros(np.shape(p))  # noqa: E731
    f = lambda p: np.ones(np.shape(p)[:-1])  # noqa: E731
    A = assemble_method_A(mesh, K, zero, f)
    B = assemble_method_B(mesh, K, zero, f, lambda p: np.zeros(np.shape(p)[:-1]))
    assert abs(A.matrix - B.matrix).max() == 0.0
    np.testing.assert_array_equal(A.rhs, B.rhs)


def test_saddle_point_structure():
    mesh = build_square_mesh(2)
    prob = builtin_problem(1, 1.0)
    A = assemble_method_A(mesh, prob.K, prob.w, prob.f).matrix.toarray()
    ne = mesh.n_edges
    M = A[:ne, :ne]
    np.testing.assert_allclose(M, M.T, atol=1e-15)
    assert np.linalg.eigvalsh(M).min() > 0
    assert np.all(A[ne:, ne:] == 0.0)


@pytest.mark.parametrize("method", [Method.A, Method.B])
def test_disk_flux_exact_with_exact_boundary_data(method):
    # the exact flux -x/2 (A) is linear, hence in RT0; p_h must reproduce it
    mesh = build_quarter_disk_mesh(6)
    prob = builtin_problem(2, 1.0)
    if method is Method.A:
        system = assemble_method_A(mesh, prob.K, prob.w, prob.f, 10, prob.u)
    else:
        system = assemble_method_B(mesh, prob.K, prob.w, prob.f, prob.div_w, 10, prob.u)
    x = solve(apply_flux_bc(system, dof_map(mesh)))
    rep = error_norms(reconstruct(mesh, x, method, prob.K), prob, mesh)
    if method is Method.A:
        assert rep.e_grad_l2 < 1e-11
        assert rep.e_divflux_l2 < 1e-11
    else:
        # the total flux is quadratic and only approximated
        assert 1e-6 < rep.e_grad_l2 < 1e-1


def test_element_coefficients_of_linear_field():
    mesh = build_quarter_disk_mesh(3)
    g = mesh_geometry(mesh)
    s, w = gauss_segment(2)
    xa = mesh.vertices[mesh.edge_vertices[:, 0]]
    xb = mesh.vertices[mesh.edge_vertices[:, 1]]
    pts = xa[:, None] + s[None, :, None] * (xb - xa)[:, None]
    field = lambda p: 0.7 * p + np.array([0.1, -0.4])  # noqa: E731
    fluxes = np.einsum("q,eqd,ed->e", w, field(pts), mesh.edge_normals)
    c, e = RT0Function(fluxes).element_coefficients(mesh, g)
    np.testing.assert_allclose(c, 0.7, atol=1e-13)
    np.testing.assert_allclose(e, np.tile([0.1, -0.4], (mesh.n_triangles, 1)), atol=1e-13)
