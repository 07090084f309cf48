"""r-adaptive piecewise-affine finite elements in one dimension.

The package builds optimal meshes for the model problem ``u'' = f`` with
zero boundary values in three ways (uniform, equidistributed via the
asymptotic mesh map, and joint gradient descent on node positions and nodal
values), evaluates the renormalized discrete energy and its limit, and
ships the comparison and convergence experiments as both a library and a
CLI (``radapt1d``).
"""

from .amf import MonotoneMap, amf_mesh, asymptotic_map, optimal_density
from .energy import (
    EnergyReport,
    action,
    exact_action,
    limit_functional,
    min_limit_energy,
    renormalized_gap,
    second_variation,
)
from .errors import (
    DegenerateDensityWarning,
    DerivativeFallbackWarning,
    InadmissibleFunctionError,
    InfeasibleStateError,
    InvalidComparisonError,
    InvalidIntegrandError,
    InvalidParameterError,
    MeshResolutionWarning,
    NotAvailableError,
    NumericError,
    OutOfDomainError,
    Radapt1dError,
    Radapt1dWarning,
    UndefinedRelativeErrorWarning,
)
from .exact import ExactSolution, closed_form_exact, solve_exact
from .experiments import (
    ExperimentConfig,
    run_compare,
    run_gamma_check,
    run_mesh_dump,
)
from .fem import TridiagonalSystem, galerkin_solve, load_vector, residual
from .fields import (
    DirichletLagrangian,
    ScalarField,
    constant,
    gaussian,
    monomial,
    parse_field_spec,
    root,
)
from .gd import (
    GdConfig,
    OptimizationState,
    amf_init,
    discrete_energy,
    energy_gradient,
    gd_run,
    make_state,
    uniform_init,
)
from .mesh import Mesh, PiecewiseAffine, interpolate, uniform_mesh
from .metrics import ComparisonRow, node_discrepancy, rel_h1_error, rel_l2_error
from .quadrature import QuadratureRule, cumulative_table, integrate

__version__ = "0.1.0"

__all__ = [
    "ComparisonRow",
    "DegenerateDensityWarning",
    "DerivativeFallbackWarning",
    "DirichletLagrangian",
    "EnergyReport",
    "ExactSolution",
    "ExperimentConfig",
    "GdConfig",
    "InadmissibleFunctionError",
    "InfeasibleStateError",
    "InvalidComparisonError",
    "InvalidIntegrandError",
    "InvalidParameterError",
    "Mesh",
    "MeshResolutionWarning",
    "MonotoneMap",
    "NotAvailableError",
    "NumericError",
    "OptimizationState",
    "OutOfDomainError",
    "PiecewiseAffine",
    "QuadratureRule",
    "Radapt1dError",
    "Radapt1dWarning",
    "ScalarField",
    "TridiagonalSystem",
    "UndefinedRelativeErrorWarning",
    "action",
    "amf_init",
    "amf_mesh",
    "asymptotic_map",
    "closed_form_exact",
    "constant",
    "cumulative_table",
    "discrete_energy",
    "energy_gradient",
    "exact_action",
    "galerkin_solve",
    "gaussian",
    "gd_run",
    "integrate",
    "interpolate",
    "limit_functional",
    "load_vector",
    "make_state",
    "min_limit_energy",
    "monomial",
    "node_discrepancy",
    "optimal_density",
    "parse_field_spec",
    "rel_h1_error",
    "rel_l2_error",
    "renormalized_gap",
    "residual",
    "root",
    "run_compare",
    "run_gamma_check",
    "run_mesh_dump",
    "second_variation",
    "solve_exact",
    "uniform_init",
    "uniform_mesh",
]
