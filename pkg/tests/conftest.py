import numpy as np
import pytest

from hermite_cd.geometry import triangle_geometry
from hermite_cd.hermite import DiffusionTensor


@pytest.fixture
def skewed_triangle():
    return triangle_geometry(np.array([[0.1, -0.2], [1.3, 0.25], [0.4, 0.9]]))


@pytest.fixture
def aniso_K():
    return DiffusionTensor(np.array([[2.0, 0.3], [0.3, 0.7]]))


def random_triangle(rng, min_area=1e-2):
    """Counterclockwise triangle with a bounded aspect ratio."""
    while True:
        p = rng.uniform(-1, 1, size=(3, 2))
        e1, e2 = p[1] - p[0], p[2] - p[0]
        area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
        if area < 0:
            p = p[[0, 2, 1]]
            area = -area
        lengths = np.linalg.norm(p[[1, 2, 0]] - p, axis=1)
        if area > min_area and area / lengths.max() ** 2 > 0.05:
            return p


# acceptance criterion -> (passed, summary line); printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k][1])
