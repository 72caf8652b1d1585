"""Solver toolkit for singularly perturbed linear reaction-diffusion systems.

Solves -E u'' + A(x) u = f on (0,1) with Dirichlet data, where E carries
small distinct diffusion parameters, using the classical central-difference
scheme on piecewise-uniform layer-adapted meshes (first- and second-order
transition-value variants), plus a convergence laboratory that measures the
parameter-uniform error rates empirically.
"""

from .convergence import (
    ConvergenceReport,
    StudyRow,
    SweepCell,
    convergence_order,
    exact_error_study,
    exact_scalar_solution,
    parameter_sweep,
    two_mesh_difference,
    with_eps,
)
from .discretize import (
    DiscreteSystem,
    SignStructureReport,
    apply_operator,
    assemble,
    check_sign_structure,
    dump_coordinates,
    to_dense,
)
from .exprs import (
    ExprDomainError,
    ExprError,
    ExprSyntaxError,
    UnknownIdentifierError,
    evaluate,
    evaluate_array,
    parse,
    to_source,
)
from .mesh import (
    InteractionOrderWarning,
    Mesh,
    MeshOrder,
    MeshParameterError,
    Side,
    TransitionParams,
    bisect_mesh,
    build_mesh,
    interaction_point,
    layer_function,
    require_admissible_intervals,
    transition_parameters,
)
from .problem import (
    AlphaConditionError,
    CoefficientDomainError,
    CoincidentParametersError,
    ProblemError,
    ProblemFormatError,
    ProblemSpec,
    ValidationReport,
    Violation,
    check_eps_condition,
    compute_alpha,
    problem_from_json,
    validate_sign_dominance,
)
from .solver import SingularBlockError, SolutionGrid, residual_norm, solve

__version__ = "0.1.0"
