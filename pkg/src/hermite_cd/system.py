"""Square sparse systems, essential flux constraints and the direct solver."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla


class SolverError(RuntimeError):
    """Factorization failed or the solve missed the residual target."""

    def __init__(self, message: str, pivot_ratio: float | None = None, residual: float | None = None):
        super().__init__(message)
        self.pivot_ratio = pivot_ratio
        self.residual = residual


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``matrix @ x = rhs`` over the retained DOFs ``free`` of an ``n_full`` vector.

    Rows are indexed by test functions, columns by trial functions.
    """

    matrix: sps.csr_matrix
    rhs: np.ndarray
    n_full: int
    free: np.ndarray
    eliminated: np.ndarray

    @classmethod
    def from_triplets(cls, rows, cols, vals, rhs, n: int) -> "LinearSystem":
        rows = np.asarray(rows).ravel()
        cols = np.asarray(cols).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        # canonical order so duplicate summation is reproducible
        order = np.lexsort((cols, rows))
        A = sps.coo_matrix((vals[order], (rows[order], cols[order])), shape=(n, n)).tocsr()
        A.sum_duplicates()
        return cls(A, np.asarray(rhs, dtype=float), n, np.arange(n), np.array([], dtype=np.int64))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def expand(self, x: np.ndarray) -> np.ndarray:
        full = np.zeros(self.n_full)
        full[self.free] = x
        return full


def apply_flux_bc(system: LinearSystem, dof_map) -> LinearSystem:
    """Drop the trial column and test row of every zero-flux edge DOF.

    ``dof_map`` is anything with a ``constrained`` array of global indices.
    Dirichlet edges are left alone: their data enters the forms naturally.
    """
    constrained = np.asarray(dof_map.constrained, dtype=np.int64)
    if constrained.size == 0:
        return system
    keep_mask = np.ones(system.n, dtype=bool)
    local = np.searchsorted(system.free, constrained)
    keep_mask[local] = False
    keep = np.flatnonzero(keep_mask)
    return replace(
        system,
        matrix=system.matrix[keep][:, keep].tocsr(),
        rhs=system.rhs[keep],
        free=system.free[keep],
        eliminated=np.union1d(system.eliminated, constrained),
    )


def solve(system: LinearSystem, rtol: float = 1e-10, refinements: int = 3) -> np.ndarray:
    """Sparse LU with iterative refinement; returns the full-length DOF vector."""
    A = system.matrix.tocsc()
    b = system.rhs
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"LU factorization failed: {exc}", pivot_ratio=0.0) from exc
    udiag = np.abs(lu.U.diagonal())
    pivot_ratio = float(udiag.min() / udiag.max()) if udiag.size else 1.0
    x = lu.solve(b)
    bnorm = np.linalg.norm(b)
    scale = bnorm if bnorm > 0 else 1.0
    res = np.linalg.norm(b - A @ x) / scale
    for _ in range(refinements):
        if res <= rtol:
            break
        x = x + lu.solve(b - A @ x)
        res = np.linalg.norm(b - A @ x) / scale
    if not np.all(np.isfinite(x)) or res > rtol:
        raise SolverError(
            f"relative residual {res:.3e} above {rtol:.0e} (pivot ratio {pivot_ratio:.3e})",
            pivot_ratio=pivot_ratio,
            residual=res,
        )
    return system.expand(x)
