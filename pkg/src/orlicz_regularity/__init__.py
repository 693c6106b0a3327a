"""Generalized Orlicz growth on planar meshes.

Growth-function algebra, Dirichlet/obstacle solvers, relative capacities,
capacitary potentials with their Riesz measures, Perron sweeps, and the
capacity-integral boundary-regularity diagnostics, verified at desk scale
against closed-form quadratic and power-growth cases.
"""

from .domain import (
    Ball,
    Box,
    Domain,
    HalfPlane,
    Rect,
    Segment,
    annulus_domain,
    ball_domain,
    parse_domain,
    punctured_ball_domain,
    rect_domain,
    slit_rect_domain,
)
from .errors import (
    ConfigError,
    DomainError,
    GeometryError,
    InfeasibleError,
    NumericError,
    OrliczError,
    RefinementError,
    ShapeError,
    UndefinedRatioError,
)
from .kernels import BACKEND, AssemblyContext
from .mesh import Mesh, ball_complement_intersection, build_mesh, classify_nodes
from .phi import (
    CoefField,
    ConditionReport,
    PhiFunction,
    check_conditions,
    const_field,
    double_phase,
    estimate_sc_constants,
    orlicz_log,
    parse_phi,
    power,
    power_log,
    powmax_field,
    step_field,
    variable_exponent,
)
from .solver import (
    SolveOptions,
    SolveResult,
    check_comparison,
    energy,
    energy_gradient,
    solve_dirichlet,
    solve_obstacle,
)

__version__ = "0.1.0"
