"""Single runs and L-sweeps over the built-in problems, with CSV and plot-data output."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .analysis import ERROR_COLUMNS, ErrorReport, RateTable, convergence_rates, error_norms
from .assembly import (
    DiscreteSolution,
    Method,
    assemble_method_hA,
    assemble_method_hB,
    reconstruct,
)
from .hermite import dof_map
from .mesh import Mesh, build_mesh
from .mixed import assemble_method_A, assemble_method_B
from .problems import ProblemSpec, RhsMode, builtin_problem
from .system import SolverError, apply_flux_bc, solve

log = logging.getLogger(__name__)

CSV_HEADER = ("method", "problem", "peclet", "L", "h", "dofs") + ERROR_COLUMNS
RATE_HEADER = ("L_coarse", "L_fine", "rate_u", "rate_grad", "rate_divflux", "rate_max")


class CaseError(RuntimeError):
    """A single (problem, method, Peclet, L) run failed."""


@dataclass
class SweepConfig:
    problem: int
    method: Method
    peclet: float
    L: Sequence[int]
    out: Path | None = None
    plot_dir: Path | None = None
    quad_degree: int = 6
    error_quad_degree: int = 10
    mode: RhsMode = RhsMode.REGEN
    exact_bc: bool = True

    def __post_init__(self):
        self.method = Method(self.method)
        self.mode = RhsMode(self.mode)
        self.L = [int(v) for v in self.L]
        if any(b <= a for a, b in zip(self.L, self.L[1:])):
            raise ValueError("L values must be strictly increasing")
        if any(v < 1 for v in self.L):
            raise ValueError("L values must be positive")


def solve_problem(
    problem: ProblemSpec,
    method: Method | str,
    mesh: Mesh,
    quad_degree: int = 6,
    exact_bc: bool = True,
) -> DiscreteSolution:
    """mesh -> assemble -> eliminate zero-flux DOFs -> solve -> reconstruct.

    With ``exact_bc`` the exact solution is imposed on Dirichlet edges; on the
    quarter disk these are chords, where u is not zero.
    """
    method = Method(method)
    K, w, f = problem.K, problem.w, problem.f
    g = problem.u if exact_bc else None
    if method is Method.A:
        system = assemble_method_A(mesh, K, w, f, quad_degree, g)
    elif method is Method.B:
        system = assemble_method_B(mesh, K, w, f, problem.div_w, quad_degree, g)
    elif method is Method.HA:
        system = assemble_method_hA(mesh, K, w, f, quad_degree=quad_degree, g=g)
    else:
        system = assemble_method_hB(mesh, K, w, f, quad_degree, g)
    system = apply_flux_bc(system, dof_map(mesh))
    dofs = solve(system)
    return reconstruct(mesh, dofs, method, K, w)


def run_case(
    problem_id: int,
    method: Method | str,
    peclet: float,
    L: int,
    quad_degree: int = 6,
    error_quad_degree: int = 10,
    mode: RhsMode | str = RhsMode.REGEN,
    exact_bc: bool = True,
) -> ErrorReport:
    problem = builtin_problem(problem_id, peclet, mode)
    mesh = build_mesh(problem.domain_id, L)
    try:
        solution = solve_problem(problem, method, mesh, quad_degree, exact_bc)
    except SolverError as exc:
        raise CaseError(
            f"problem={problem_id} method={Method(method).value} peclet={peclet:g} L={L}: {exc}"
        ) from exc
    return error_norms(solution, problem, mesh, error_quad_degree)


def csv_row(method: Method, problem: int, peclet: float, L: int, report: ErrorReport) -> list[str]:
    values = [report.h, report.dofs] + [getattr(report, c) for c in ERROR_COLUMNS]
    return [Method(method).value, str(problem), repr(float(peclet)), str(L)] + [
        str(v) if isinstance(v, int) else f"{v:.10e}" for v in values
    ]


def run_sweep(config: SweepConfig) -> tuple[list[ErrorReport], RateTable | None]:
    """Run every L of the sweep, writing the CSV row by row.

    A failing case aborts the sweep; rows already written are kept.
    """
    reports: list[ErrorReport] = []
    handle = writer = None
    if config.out is not None:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        handle = open(config.out, "w", newline="")
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
    try:
        for L in config.L:
            log.info("running problem %d method %s Pe=%g L=%d", config.problem, config.method.value, config.peclet, L)
            report = run_case(
                config.problem, config.method, config.peclet, L,
                config.quad_degree, config.error_quad_degree, config.mode, config.exact_bc,
            )
            reports.append(report)
            if writer is not None:
                writer.writerow(csv_row(config.method, config.problem, config.peclet, L, report))
                handle.flush()
    finally:
        if handle is not None:
            handle.close()

    rates = convergence_rates(reports) if len(reports) >= 2 else None
    if rates is not None and config.out is not None:
        write_rates(config.out.with_name(config.out.stem + "_rates.csv"), config.L, rates)
    if config.plot_dir is not None:
        write_plot_data(config.plot_dir, config.L, reports)
    return reports, rates


def write_rates(path: Path, Ls: Sequence[int], rates: RateTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RATE_HEADER)
        for (Lc, Lf), row in zip(zip(Ls[:-1], Ls[1:]), rates.rates):
            writer.writerow(
                [Lc, Lf] + ["nan" if row[c] is None else f"{row[c]:.6f}" for c in ERROR_COLUMNS]
            )


def write_plot_data(plot_dir: Path, Ls: Sequence[int], reports: Sequence[ErrorReport]) -> None:
    """Two-column (h, value) files per error measure plus h and h^2 reference lines.

    h is 1/L, the lattice spacing used on the axes of log-log error plots.
    """
    plot_dir.mkdir(parents=True, exist_ok=True)
    hs = [1.0 / L for L in Ls]
    for col in ERROR_COLUMNS:
        lines = [f"{h:.10e} {getattr(r, col):.10e}" for h, r in zip(hs, reports)]
        (plot_dir / f"{col}.dat").write_text("\n".join(lines) + "\n")
    (plot_dir / "ref_h.dat").write_text("\n".join(f"{h:.10e} {h:.10e}" for h in hs) + "\n")
    (plot_dir / "ref_h2.dat").write_text("\n".join(f"{h:.10e} {h * h:.10e}" for h in hs) + "\n")


def format_table(Ls: Sequence[int], reports: Sequence[ErrorReport], rates: RateTable | None) -> str:
    lines = [f"{'L':>4} {'h':>10} " + " ".join(f"{c:>15}" for c in ERROR_COLUMNS)]
    for L, r in zip(Ls, reports):
        lines.append(f"{L:>4} {r.h:10.4e} " + " ".join(f"{getattr(r, c):15.8e}" for c in ERROR_COLUMNS))
    if rates is not None:
        lines.append("rates:")
        for (Lc, Lf), row in zip(zip(Ls[:-1], Ls[1:]), rates.rates):
            cells = ["   nan" if row[c] is None or math.isnan(row[c]) else f"{row[c]:6.3f}" for c in ERROR_COLUMNS]
            lines.append(f"{Lc:>4}->{Lf:<4} " + " ".join(f"{c:>15}" for c in cells))
    return "\n".join(lines)
