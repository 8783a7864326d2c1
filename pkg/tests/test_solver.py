import io

import numpy as np
import pytest
import scipy.sparse as sp

from tdcshell import assembly as asm
from tdcshell import solver
from tdcshell.errors import SingularSystemError

from conftest import clamped_plate_problem


def tiny_system(matrix, rhs):
    """Wrap a hand-built matrix in the SaddleSystem container."""
    M = sp.csr_matrix(np.asarray(matrix, dtype=float))
    return asm.SaddleSystem(matrix=M, rhs=np.asarray(rhs, dtype=float),
                            dofmap=None, mult_scale=1.0,
                            k_physical=M, problem=None)


def test_hand_solvable_saddle_system():
    rep = solver.solve(tiny_system([[1.0, 1.0], [1.0, 0.0]], [2.0, 1.0]))
    assert np.allclose(rep.solution, [1.0, 1.0], atol=1e-14)
    assert rep.residual_norm_rel < 1e-14
    assert rep.factorization_kind == "superlu-rcm"
    assert rep.pivot_perturbations == 0


def test_clamped_plate_solve_residual():
    sys_ = asm.assemble(clamped_plate_problem(3, 4))
    rep = solver.solve(sys_)
    assert rep.residual_norm_rel < 1e-10


def test_solve_is_deterministic():
    sys_ = asm.assemble(clamped_plate_problem(2, 3))
    x1 = solver.solve(sys_).solution
    x2 = solver.solve(sys_).solution
    assert np.array_equal(x1, x2)


def test_constraint_rows_satisfied():
    prob = clamped_plate_problem(3, 4)
    sys_ = asm.assemble(prob)
    rep = solver.solve(sys_)
    dm = sys_.dofmap
    x = rep.solution
    # every multiplier row of M x = b is a constraint equation
    for blk in ("lambda_n", "lambda_u", "lambda_w"):
        sl = dm.slices[blk]
        if sl.stop == sl.start:
            continue
        res = (sys_.matrix[sl, :] @ x) - sys_.rhs[sl]
        scale = max(np.abs(x[dm.slices["u"]]).max(), 1e-30) * sys_.mult_scale
        assert np.abs(res).max() < 1e-8 * scale


def test_singular_system_reports_null_dimension():
    M = np.zeros((4, 4))
    M[0, 0] = M[1, 1] = 1.0
    with pytest.raises(SingularSystemError) as err:
        solver.solve(tiny_system(M, [1.0, 1.0, 0.5, 0.0]))
    assert err.value.null_dim == 2


def test_zero_rhs_zero_solution():
    rep = solver.solve(tiny_system([[2.0, 0.0], [0.0, 3.0]], [0.0, 0.0]))
    assert np.abs(rep.solution).max() == 0.0
    assert rep.residual_norm_rel == 0.0


def test_dump_system_matrixmarket(tmp_path):
    sys_ = asm.assemble(clamped_plate_problem(2, 2))
    mpath = tmp_path / "mat.mtx"
    rpath = tmp_path / "rhs.mtx"
    solver.dump_system(sys_, mpath, rpath)
    from scipy.io import mmread

    M = mmread(str(mpath)).tocsr()
    b = np.asarray(mmread(str(rpath))).ravel()
    assert M.shape == sys_.matrix.shape
    assert abs(M - sys_.matrix).max() < 1e-15 * max(1.0, abs(sys_.matrix).max())
    assert np.allclose(b, sys_.rhs)


def test_solution_container():
    prob = clamped_plate_problem(2, 3)
    sol = solver.solve_problem(prob)
    uc, wc = sol.coefficients()
    assert uc.shape == (sol.system.dofmap.n_cp, 3)
    assert np.array_equal(sol.vector, sol.report.solution)
