"""Finite element solver for the thermistor problem.

A nonlinear p-Laplacian type potential equation with temperature-dependent
conductivity is coupled to a heat equation driven by Joule heating, with
mixed electrical and Robin thermal boundary conditions.
"""

from .constitutive import (
    AffineClamped,
    Checkerboard,
    ConductivityModel,
    Constant,
    GaussianBump,
    HeatModel,
    Kind,
    ModelError,
    flux,
    iv_curve,
    monotonicity_gap,
    plap_monotonicity_lower_bound,
    sigma_eps_eval,
    sigma_eval,
    source_f,
    source_f_eps,
)
from .coupling import (
    SimulationConfig,
    SimulationError,
    SimulationResult,
    SimulationState,
    coupled_step,
    eps_study,
    run_simulation,
)
from .diagnostics import (
    DiagnosticsRow,
    balance_residual,
    check_monotonicity_suite,
    estimate_functionals,
    terminal_current,
)
from .heat import HeatStepProblem, heat_step
from .mesh import Mesh, MeshError, build_mesh
from .potential import (
    NonlinearSolveReport,
    PotentialProblem,
    SolverError,
    assemble_potential_residual,
    solve_potential,
)

__version__ = "0.1.0"
