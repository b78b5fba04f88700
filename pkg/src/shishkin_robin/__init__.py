"""Fitted-mesh finite differences for singularly perturbed parabolic
reaction-diffusion problems with Robin boundary conditions."""

from .analysis import (
    SweepConfig, TwoMeshReport, format_table, interpolate, report_csv, run_sweep,
    two_mesh_difference,
)
from .errors import DataEvaluationError, NumericError
from .kernels import BACKEND
from .mesh import (
    SpaceMesh, TimeMesh, build_space_mesh, build_time_mesh, layer_functions,
    transition_parameter,
)
from .problem import (
    Problem, ValidationReport, check_corner_compatibility, constant_problem,
    example_problem, validate_problem,
)
from .solver import (
    GridSolution, TridiagonalSystem, assemble_time_step, discrete_residual,
    discrete_x_derivative, march, second_difference, thomas_solve,
)

__version__ = "0.1.0"
