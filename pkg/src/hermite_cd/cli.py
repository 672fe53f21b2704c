"""Command-line entry point: one problem, one method, one Peclet number, a list of L."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .analysis import MAX_INFSUP_DOFS, infsup_estimate
from .assembly import Method
from .harness import CaseError, SweepConfig, format_table, run_sweep
from .mesh import build_mesh, dump_mesh
from .problems import RhsMode, builtin_problem

log = logging.getLogger("hermite_cd")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty L list")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hermite-cd",
        description="Solve a built-in convection-diffusion test problem over a sequence of meshes.",
    )
    p.add_argument("--problem", type=int, choices=(1, 2), required=True)
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--peclet", type=float, required=True)
    p.add_argument("--L", type=_int_list, required=True, help="lattice sizes, e.g. 8,16,32,64")
    p.add_argument("--out", type=Path, required=True, help="CSV file for the error table")
    p.add_argument("--plot-dir", type=Path, help="directory for two-column (h, error) files")
    p.add_argument("--quad-degree", type=int, default=6, choices=(2, 4, 6, 10))
    p.add_argument("--mode", choices=[m.value for m in RhsMode], default=RhsMode.REGEN.value)
    p.add_argument("--zero-bc", action="store_true", help="impose u = 0 instead of the exact solution on Dirichlet edges")
    p.add_argument("--infsup", action="store_true", help=f"also report the hA inf-sup estimate (at most {MAX_INFSUP_DOFS} DOFs)")
    p.add_argument("--dump-mesh", type=Path, help="write the mesh of every L; '{L}' in the name is substituted")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _mesh_path(template: Path, L: int, several: bool) -> Path:
    if "{L}" in template.name:
        return template.with_name(template.name.replace("{L}", str(L)))
    if several:
        return template.with_name(f"{template.stem}_L{L}{template.suffix}")
    return template


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = SweepConfig(
            problem=args.problem,
            method=Method(args.method),
            peclet=args.peclet,
            L=args.L,
            out=args.out,
            plot_dir=args.plot_dir,
            quad_degree=args.quad_degree,
            mode=RhsMode(args.mode),
            exact_bc=not args.zero_bc,
        )
        problem = builtin_problem(args.problem, args.peclet, args.mode)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.dump_mesh is not None:
        for L in config.L:
            path = _mesh_path(args.dump_mesh, L, len(config.L) > 1)
            path.parent.mkdir(parents=True, exist_ok=True)
            dump_mesh(build_mesh(problem.domain_id, L), path)
            log.info("mesh written to %s", path)

    try:
        reports, rates = run_sweep(config)
    except CaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(format_table(config.L, reports, rates))

    if args.infsup:
        for L in config.L:
            try:
                alpha = infsup_estimate(build_mesh(problem.domain_id, L), problem.K, problem.w)
            except ValueError as exc:
                print(f"infsup L={L}: skipped ({exc})")
                continue
            print(f"infsup L={L}: {alpha:.6e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
