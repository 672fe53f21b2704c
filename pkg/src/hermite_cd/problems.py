"""Manufactured-solution test problems.

All callables take points of shape (..., 2) and broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .hermite import DiffusionTensor
from .mesh import DomainId

Field = Callable[[np.ndarray], np.ndarray]


class RhsMode(str, Enum):
    REGEN = "regen-f"  # f = -div K grad u + w . grad u for the actual Peclet number
    FIXED = "fixed-f"  # the Peclet-1 source kept while w scales


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    problem_id: int
    domain_id: str
    K: DiffusionTensor
    peclet: float
    w: Field
    div_w: Field
    f: Field
    u: Field
    grad_u: Field
    divflux_u: Field  # div K grad u
    mode: RhsMode = RhsMode.REGEN

    def residual(self, x: np.ndarray) -> np.ndarray:
        """f - (-div K grad u + w . grad u); zero for a consistent problem."""
        conv = np.einsum("...d,...d->...", self.w(x), self.grad_u(x))
        return self.f(x) + self.divflux_u(x) - conv


def _xy(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1]


def _square_problem(pe: float) -> ProblemSpec:
    s2 = np.sqrt(2.0)

    def u(x):
        x1, x2 = _xy(x)
        return (x1 - x1**2) * (x2 - x2**2) / 4

    def grad_u(x):
        x1, x2 = _xy(x)
        return np.stack([(1 - 2 * x1) * (x2 - x2**2), (x1 - x1**2) * (1 - 2 * x2)], axis=-1) / 4

    def lap_u(x):
        x1, x2 = _xy(x)
        return -((x2 - x2**2) + (x1 - x1**2)) / 2

    def w(x):
        x1, x2 = _xy(x)
        return pe * np.stack([x1**2, x2**2], axis=-1) / s2

    def div_w(x):
        x1, x2 = _xy(x)
        return pe * 2 * (x1 + x2) / s2

    def f(x):
        return -lap_u(x) + np.einsum("...d,...d->...", w(x), grad_u(x))

    return ProblemSpec(1, DomainId.UNIT_SQUARE, DiffusionTensor.identity(), pe, w, div_w, f, u, grad_u, lap_u)


def _disk_problem(pe: float, mode: RhsMode) -> ProblemSpec:
    def u(x):
        x1, x2 = _xy(x)
        return (1 - x1**2 - x2**2) / 4

    def grad_u(x):
        return -np.asarray(x, dtype=float) / 2

    def lap_u(x):
        x1, _ = _xy(x)
        return -np.ones_like(x1)

    def w(x):
        return pe * np.asarray(x, dtype=float)

    def div_w(x):
        x1, _ = _xy(x)
        return np.full_like(x1, 2.0 * pe)

    source_pe = pe if mode is RhsMode.REGEN else 1.0

    def f(x):
        x1, x2 = _xy(x)
        return 1 - source_pe * (x1**2 + x2**2) / 2

    return ProblemSpec(
        2, DomainId.QUARTER_DISK, DiffusionTensor.identity(), pe, w, div_w, f, u, grad_u, lap_u, mode
    )


def builtin_problem(problem_id: int, peclet: float, mode: RhsMode | str = RhsMode.REGEN) -> ProblemSpec:
    """Test problem 1 (unit square) or 2 (quarter disk) at the given Peclet number."""
    if peclet < 0:
        raise ValueError("Peclet number must be non-negative")
    mode = RhsMode(mode)
    if problem_id == 1:
        return _square_problem(float(peclet))
    if problem_id == 2:
        return _disk_problem(float(peclet), mode)
    raise ValueError(f"unknown test problem {problem_id}; expected 1 or 2")
