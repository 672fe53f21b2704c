from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hermite_cd.geometry import (
    DegenerateElementError,
    dirichlet_edge_integrals,
    gauss_segment,
    integrate,
    map_points,
    mesh_geometry,
    quadrature_rule,
    triangle_geometry,
)
from hermite_cd.mesh import Marker, build_quarter_disk_mesh, build_square_mesh

X, Y, S, T = sp.symbols("x y s t")

# rational vertices keep the symbolic oracle exact
TRI = [(Fraction(1, 10), Fraction(-1, 5)), (Fraction(13, 10), Fraction(1, 4)), (Fraction(2, 5), Fraction(9, 10))]


def sympy_triangle_integral(expr, verts):
    """Exact integral by pulling back to the reference triangle.

    The pulled-back polynomial is expanded symbolically and integrated term
    by term with int s^a t^b = a! b! / (a + b + 2)!.
    """
    (x0, y0), (x1, y1), (x2, y2) = [(sp.Rational(a), sp.Rational(b)) for a, b in verts]
    xs = x0 + S * (x1 - x0) + T * (x2 - x0)
    ys = y0 + S * (y1 - y0) + T * (y2 - y0)
    jac = abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
    poly = sp.Poly(sp.expand(expr.subs({X: xs, Y: ys}, simultaneous=True)), S, T)
    total = sum(
        c * sp.factorial(a) * sp.factorial(b) / sp.factorial(a + b + 2) for (a, b), c in poly.terms()
    )
    return total * jac


@pytest.mark.parametrize("degree", [2, 4, 6, 10])
def test_monomial_exactness(degree):
    rule = quadrature_rule(degree)
    verts = np.array([[float(a), float(b)] for a, b in TRI])
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            exact = float(sympy_triangle_integral(X**i * Y**j, TRI))
            approx = integrate(verts, lambda p: p[:, 0] ** i * p[:, 1] ** j, rule)
            assert approx == pytest.approx(exact, rel=1e-12, abs=1e-14), (i, j)


@pytest.mark.parametrize("degree", [2, 4, 6, 10])
def test_rule_structure(degree):
    rule = quadrature_rule(degree)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(rule.weights > 0)
    np.testing.assert_allclose(rule.points.sum(axis=1), 1.0, atol=1e-14)
    assert np.all(rule.points >= -1e-14)
    assert len(rule.points) == {2: 3, 4: 6, 6: 12, 10: 216}[degree]


def test_degree_six_misses_degree_seven():
    rule = quadrature_rule(6)
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    exact = float(sympy_triangle_integral(X**7, [(0, 0), (1, 0), (0, 1)]))
    assert abs(integrate(verts, lambda p: p[:, 0] ** 7, rule) - exact) > 1e-8


def test_unsupported_degree():
    with pytest.raises(ValueError):
        quadrature_rule(3)


def test_gauss_segment():
    s, w = gauss_segment(3)
    for k in range(6):
        assert w @ s**k == pytest.approx(1.0 / (k + 1), rel=1e-14)


def test_triangle_geometry(skewed_triangle):
    g = skewed_triangle
    p = g.vertices
    e1, e2 = p[1] - p[0], p[2] - p[0]
    assert g.area == pytest.approx(0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0]))
    for i in range(3):
        a, b = p[(i + 1) % 3], p[(i + 2) % 3]
        # outward: points away from the opposite vertex
        assert (p[i] - a) @ g.normals[i] < 0
        assert (b - a) @ g.normals[i] == pytest.approx(0.0, abs=1e-14)
        assert g.heights[i] * g.face_lengths[i] == pytest.approx(2 * g.area)
    # sum |F| n_F = 0 on a closed polygon
    np.testing.assert_allclose(g.face_lengths @ g.normals, 0.0, atol=1e-14)


def test_degenerate_triangle():
    with pytest.raises(DegenerateElementError):
        triangle_geometry([[0, 0], [1, 1], [2, 2]])
    with pytest.raises(DegenerateElementError):
        triangle_geometry([[0, 0], [0, 1], [1, 0]])


def test_mesh_geometry_signs():
    m = build_quarter_disk_mesh(4)
    g = mesh_geometry(m)
    assert set(np.unique(g.signs)) <= {-1.0, 1.0}
    interior = np.flatnonzero(m.edge_triangles[:, 1] >= 0)
    for e in interior:
        t0, t1 = m.edge_triangles[e]
        i0 = list(m.triangle_edges[t0]).index(e)
        i1 = list(m.triangle_edges[t1]).index(e)
        assert g.signs[t0, i0] == -g.signs[t1, i1]


def test_map_points_batched(skewed_triangle):
    rule = quadrature_rule(4)
    single = map_points(skewed_triangle.vertices, rule)
    batched = map_points(np.stack([skewed_triangle.vertices] * 2), rule)
    np.testing.assert_array_equal(batched[1], single)
    np.testing.assert_allclose(rule.weights @ single, skewed_triangle.centroid)


def test_dirichlet_edge_integrals():
    m = build_square_mesh(4)
    # g = 1: outward-signed edge lengths; sum of sigma |F| n_F vanishes
    vals = dirichlet_edge_integrals(m, lambda p: np.ones(p.shape[:-1]))
    b = m.boundary_edges()
    np.testing.assert_allclose(np.abs(vals[b]), m.edge_lengths[b])
    np.testing.assert_allclose(vals[b] @ m.edge_normals[b], 0.0, atol=1e-14)
    assert np.all(vals[m.edge_triangles[:, 1] >= 0] == 0.0)
    assert np.all(dirichlet_edge_integrals(m, None) == 0.0)


def test_dirichlet_edges_skip_symmetry_axes():
    m = build_quarter_disk_mesh(3)
    vals = dirichlet_edge_integrals(m, lambda p: np.ones(p.shape[:-1]))
    assert np.all(vals[m.edges_with_marker(Marker.FLUX_ZERO)] == 0.0)
    assert np.all(vals[m.edges_with_marker(Marker.DIRICHLET_ZERO)] != 0.0)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.fractions(-2, 2, max_denominator=8), min_size=6, max_size=6),
    st.integers(0, 10),
    st.integers(0, 10),
)
def test_random_triangles_degree_ten(coords, i, j):
    verts = [(coords[0], coords[1]), (coords[2], coords[3]), (coords[4], coords[5])]
    p = np.array([[float(a), float(b)] for a, b in verts])
    area = 0.5 * ((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
    if abs(area) < 1e-3:
        return
    if area < 0:
        verts, p = verts[::-1], p[::-1].copy()
    j = min(j, 10 - i)
    exact = float(sympy_triangle_integral(X**i * Y**j, verts))
    approx = integrate(p, lambda q: q[:, 0] ** i * q[:, 1] ** j, quadrature_rule(10))
    scale = max(1.0, float(np.abs(p).max()) ** (i + j)) * abs(area)
    assert abs(approx - exact) <= 1e-12 * scale
