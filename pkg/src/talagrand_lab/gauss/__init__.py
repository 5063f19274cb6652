"""Product measures on Euclidean space: semigroup, gradient norms, influences, isoperimetry."""
from .inequalities import corollary3_report, interpolated_q_report, theorem6_constant, theorem6_report
from .influence import (
    GeometricInfluenceEstimate,
    corollary7_check,
    exp_power_influence_report,
    geometric_influence,
    isoperimetric_bound_check,
    isoperimetric_profile,
    minkowski_content,
)
from .measures import (
    Factor,
    ProductMeasure,
    QuadratureGrid,
    SampleCloud,
    SmoothFunction,
    custom,
    exp_power,
    gaussian,
    gaussian_grid,
)
from .ou import (
    gradient_bound_check,
    gradient_commutation_check,
    gradient_lp_norm,
    ou_gradient,
    ou_semigroup_apply,
    sign_probe,
)
from .sets import Ball, Box, HalfSpace, PredicateSet, parse_set_spec

__all__ = [
    "Ball",
    "Box",
    "Factor",
    "GeometricInfluenceEstimate",
    "HalfSpace",
    "PredicateSet",
    "ProductMeasure",
    "QuadratureGrid",
    "SampleCloud",
    "SmoothFunction",
    "corollary3_report",
    "corollary7_check",
    "custom",
    "exp_power",
    "exp_power_influence_report",
    "gaussian",
    "gaussian_grid",
    "geometric_influence",
    "gradient_bound_check",
    "gradient_commutation_check",
    "gradient_lp_norm",
    "interpolated_q_report",
    "isoperimetric_bound_check",
    "isoperimetric_profile",
    "minkowski_content",
    "ou_gradient",
    "ou_semigroup_apply",
    "parse_set_spec",
    "sign_probe",
    "theorem6_constant",
    "theorem6_report",
]
