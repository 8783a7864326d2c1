"""Direct solution of the assembled saddle-point systems.

The symmetric indefinite block system is factorized as-is (no elimination
of multiplier blocks) with SuperLU's sparse LU with partial pivoting,
which is robust for these indefinite matrices at desk scale and fully
deterministic for a fixed matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SaddleSystem, assemble, ShellProblem
from .errors import SingularSystemError, SolveAccuracyError

_RESIDUAL_TOL = 1e-8


@dataclass
class SolveReport:
    """Solution vector of the system as assembled, plus solve diagnostics."""

    solution: np.ndarray
    residual_norm_rel: float
    factorization_kind: str = "superlu"
    pivot_perturbations: int = 0


def _null_dim_estimate(M):
    n = M.shape[0]
    if n > 3000:
        return None
    sv = np.linalg.svd(M.toarray(), compute_uv=False)
    tol = max(M.shape) * np.finfo(float).eps * sv[0] if sv[0] > 0 else 1.0
    return int(np.sum(sv < max(tol, 1e-12 * sv[0])))

def solve(system: SaddleSystem) -> SolveReport:
    """Factorize and solve; raises SingularSystemError on rank deficiency.

    A reverse Cuthill-McKee permutation (deterministic for a given matrix)
    keeps the LU fill-in of the wide saddle blocks manageable; the blocks
    themselves are factorized together, never eliminated.
    """
    from scipy.sparse.csgraph import reverse_cuthill_mckee

    perm = reverse_cuthill_mckee(system.matrix.tocsr(), symmetric_mode=True)
    M = system.matrix[perm][:, perm].tocsc()
    try:
        lu = spla.splu(M, permc_spec="NATURAL")
        xp = lu.solve(system.rhs[perm])
        x = np.empty_like(xp)
        x[perm] = xp
    except RuntimeError as exc:
        nd = _null_dim_estimate(M)
        msg = f"saddle system is singular (estimated null-space dimension: {nd if nd is not None else '>=1, too large for dense probe'})"
        raise SingularSystemError(msg, null_dim=nd) from exc
    if not np.all(np.isfinite(x)):
        nd = _null_dim_estimate(M)
        raise SingularSystemError(
            f"factorization produced non-finite values (estimated null-space dimension: {nd})",
            null_dim=nd)
    bnorm = np.linalg.norm(system.rhs)
    rnorm = np.linalg.norm(system.matrix @ x - system.rhs)
    rel = rnorm / bnorm if bnorm > 0 else (0.0 if rnorm == 0 else np.inf)
    if rel > 1e-6:
        nd = _null_dim_estimate(M)
        if nd:
            raise SingularSystemError(
                f"saddle system is singular (estimated null-space dimension: {nd})",
                null_dim=nd)
        raise SolveAccuracyError(
            f"direct solve residual {rel:.3e} exceeds the acceptance bound")
    return SolveReport(solution=x, residual_norm_rel=float(rel), factorization_kind="superlu-rcm")


@dataclass
class ShellSolution:
    """A solved problem: keeps the system and the solution vector together."""

    problem: ShellProblem
    system: SaddleSystem
    report: SolveReport

    @property
    def vector(self):
        return self.report.solution

    def coefficients(self):
        """(u, w) control-point coefficient grids, each (n_cp, 3)."""
        return self.system.dofmap.expand(self.vector)


def solve_problem(problem: ShellProblem) -> ShellSolution:
    system = assemble(problem)
    report = solve(system)
    return ShellSolution(problem=problem, system=system, report=report)


def dump_system(system: SaddleSystem, matrix_path, rhs_path):
    """Write matrix and right-hand side in MatrixMarket format."""
    from scipy.io import mmwrite

    mmwrite(str(matrix_path), system.matrix.tocoo())
    mmwrite(str(rhs_path), system.rhs.reshape(-1, 1))
