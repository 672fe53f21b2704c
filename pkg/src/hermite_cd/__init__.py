"""Hermite flux-continuous finite elements for 2D convection-diffusion.

Methods hA and hB use quadratic Hermite elements whose degrees of freedom
are edge-mean normal fluxes and cell means; methods A and B are the RT0 x P0
mixed baselines they are compared against.
"""

from .analysis import ErrorReport, RateTable, convergence_rates, error_norms, h_norm, infsup_estimate
from .assembly import Method, assemble_method_hA, assemble_method_hB, reconstruct
from .geometry import quadrature_rule
from .hermite import DiffusionTensor, HermiteField, Space, dof_map, local_basis
from .mesh import DomainId, Marker, Mesh, build_mesh, build_quarter_disk_mesh, build_square_mesh
from .mixed import assemble_method_A, assemble_method_B
from .problems import ProblemSpec, RhsMode, builtin_problem
from .harness import SweepConfig, run_case, run_sweep
from .system import SolverError, apply_flux_bc, solve

__version__ = "0.1.0"

__all__ = [
    "DiffusionTensor",
    "DomainId",
    "ErrorReport",
    "HermiteField",
    "Marker",
    "Mesh",
    "Method",
    "ProblemSpec",
    "RateTable",
    "RhsMode",
    "SolverError",
    "Space",
    "SweepConfig",
    "apply_flux_bc",
    "assemble_method_A",
    "assemble_method_B",
    "assemble_method_hA",
    "assemble_method_hB",
    "build_mesh",
    "build_quarter_disk_mesh",
    "build_square_mesh",
    "builtin_problem",
    "convergence_rates",
    "dof_map",
    "error_norms",
    "h_norm",
    "infsup_estimate",
    "local_basis",
    "quadrature_rule",
    "reconstruct",
    "run_case",
    "run_sweep",
    "solve",
]
