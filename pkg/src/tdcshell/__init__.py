"""Linear Reissner-Mindlin shells on NURBS surfaces via tangential calculus.

Surface differential operators (projectors, tangential gradients, the
shape operator) are formed in global Cartesian coordinates, so the shell
equations never touch curvilinear coordinates; displacements and the
difference vector are discretized component-wise with NURBS and the
tangentiality of the difference vector is enforced weakly.
"""
import os

# Thread count for the underlying BLAS; must be set before numpy loads to
# take full effect, which is the case for console-script entry points.
if "TDCSHELL_THREADS" in os.environ:
    os.environ.setdefault("OMP_NUM_THREADS", os.environ["TDCSHELL_THREADS"])
    os.environ.setdefault("OPENBLAS_NUM_THREADS", os.environ["TDCSHELL_THREADS"])

__version__ = "0.1.0"

from .errors import (CapabilityError, DegenerateGeometryError, DomainError,
                     SingularSystemError, SolveAccuracyError)
from .nurbs import (BasisEval, KnotVector, NurbsPatch, elevate_degree,
                    eval_basis, make_field_patch, refine_uniform,
                    uniform_knot_vector)
from .geometry import (AnalyticGeometry, BoundaryFrame, GeometryMap, MapJet,
                       NurbsGeometry, SurfaceFrame, boundary_frame_at,
                       cylinder_panel, fit_nurbs_geometry, flower_shell,
                       frame_at, frames, hyperbolic_paraboloid, plate,
                       sphere_patch, surface_grad_scalar,
                       surface_grad_vector_dir)
from .mechanics import (FieldPointState, Material, StrainState,
                        StressResultants, shear_angle, strains,
                        stress_resultants)
from .assembly import (DirectionalConstraint, DofMap, EdgeCondition,
                       SaddleSystem, ShellProblem, assemble, quadrature_rule)
from .solver import ShellSolution, SolveReport, dump_system, solve, solve_problem
from .postprocess import (EnergyReport, ResidualNorms, convergence_study,
                          evaluate_solution, export_vtk, principal_moments,
                          residual_norms, richardson, stored_energy, write_csv)
from .benchmarks import CASES, REFERENCES, apply_load_case, make_problem
