"""
halfspace-liouville

Numerics for conformally invariant fully nonlinear equations on the half
space: Mobius Hessians, symmetric cones, Kelvin transforms and moving
spheres, bubble rigidity, and the one-variable ODE with its first integral.

Version: 1.0.0
"""

__version__ = "1.0.0"

from .cones import (
    cone_constants,
    cone_status,
    check_conditions,
    f_eval,
    make_cone,
    make_symfunc,
    mu_minus,
)
from .fields import FieldSpec, Jet, ScalarField, jet, make_field
from .hessian import (
    boundary_values,
    conformal_hessian,
    eigenvalues,
    one_var_eigenvalues,
    radial_eigenvalues,
    ricci_transform,
)
from .liouville import (
    BubbleParams,
    VerifyReport,
    bubble_fit,
    counterexample,
    critical_lambda,
    residual,
    rigidity_check,
    sphere_comparison,
)
from .mobius import (
    MobiusMap,
    jacobian_log_det,
    kelvin,
    mobius_apply,
    normalize_gradient_map,
    pushforward,
)
from .ode import (
    OdeParams,
    OdeState,
    OdeTrajectory,
    convexity_check,
    first_integral,
    integrate_general,
    integrate_model,
    threshold_w0,
)

__all__ = [
    "FieldSpec",
    "Jet",
    "ScalarField",
    "make_field",
    "jet",
    "MobiusMap",
    "mobius_apply",
    "jacobian_log_det",
    "pushforward",
    "kelvin",
    "normalize_gradient_map",
    "conformal_hessian",
    "eigenvalues",
    "one_var_eigenvalues",
    "radial_eigenvalues",
    "boundary_values",
    "ricci_transform",
    "make_cone",
    "make_symfunc",
    "cone_status",
    "mu_minus",
    "f_eval",
    "check_conditions",
    "cone_constants",
    "OdeParams",
    "OdeState",
    "OdeTrajectory",
    "first_integral",
    "integrate_model",
    "threshold_w0",
    "integrate_general",
    "convexity_check",
    "BubbleParams",
    "VerifyReport",
    "bubble_fit",
    "sphere_comparison",
    "critical_lambda",
    "rigidity_check",
    "counterexample",
    "residual",
]
