"""Numerical certificates for tail-ratio measure classes.

The pipeline: certify a symmetric measure's tail-ratio decay, cash it in
for the convex exponential product inequality at the explicit cost scale,
derive a variance bound, close the loop back to tail membership, and check
the resulting dimension-free concentration for product measures in R^n.
"""

from .concentration import (
    ComposedConvex,
    ConcentrationReport,
    ConvexSet,
    DeviationReport,
    HalfSpace,
    L1Ball,
    L2Ball,
    LinearFunctional,
    MaxCoordinate,
    ProductMeasure,
    Slab,
    cost_ball_member,
    cost_ball_support,
    deviation_exponent_slack,
    deviation_function_from_dict,
    enlargement_member,
    product_from_dict,
    set_from_dict,
    verify_cost_ball_enlargement,
    verify_lipschitz_deviation,
    verify_two_level_enlargement,
    wilson_interval,
)
from .convexfn import (
    DiscreteGradient,
    PLConvex,
    discrete_gradient,
    random_plconvex,
    truncate_slopes,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DivergentIntegralError,
    GridMismatchError,
    MeasureInvalidError,
    NoDensityError,
    NotInClassError,
    NotSymmetricError,
    SlopeBoundError,
    TaucertError,
    UnboundedBelowError,
    UnsupportedSetError,
)
from .infconv import (
    Cost,
    EnvelopeDropReport,
    EnvelopeFunction,
    envelope_drop_certificate,
    infconv_exact,
    infconv_grid,
)
from .measure1d import (
    AtomDensityMix,
    Exponential,
    Gaussian,
    IntegralEstimate,
    Measure1D,
    MembershipCertificate,
    TwoPoint,
    Uniform,
    bobkov_goetze_constant,
    lambda_star,
    measure_from_dict,
    muckenhoupt_constant,
    restrict_positive,
)
from .reports import (
    SCHEMA,
    record_line,
    render_records,
    render_table,
    sanitize,
)
from .poincare import (
    PoincareEstimate,
    TailClosureReport,
    certify_poincare_to_tail,
    cp_lower_bound,
    dirichlet_energy,
    hinge,
    variance,
)
from .tauverify import (
    IncrementReport,
    TauReport,
    TauSuiteSummary,
    VarianceSuiteSummary,
    alpha_chain_margin,
    certify_exponential_increment,
    certify_halfline_increment,
    certify_tail_to_tau,
    certify_tau_to_poincare,
    default_exponential_suite,
    default_halfline_suite,
    increment_alpha,
    tau_functional,
)

__version__ = "0.1.0"

__all__ = [
    "AtomDensityMix",
    "ComposedConvex",
    "ConcentrationReport",
    "ConfigError",
    "ConvexSet",
    "Cost",
    "DegenerateInputError",
    "DeviationReport",
    "DiscreteGradient",
    "DivergentIntegralError",
    "EnvelopeDropReport",
    "EnvelopeFunction",
    "Exponential",
    "Gaussian",
    "GridMismatchError",
    "HalfSpace",
    "IncrementReport",
    "IntegralEstimate",
    "L1Ball",
    "L2Ball",
    "LinearFunctional",
    "MaxCoordinate",
    "Measure1D",
    "MeasureInvalidError",
    "MembershipCertificate",
    "NoDensityError",
    "NotInClassError",
    "NotSymmetricError",
    "PLConvex",
    "PoincareEstimate",
    "ProductMeasure",
    "SCHEMA",
    "Slab",
    "SlopeBoundError",
    "TailClosureReport",
    "TauReport",
    "TauSuiteSummary",
    "TaucertError",
    "TwoPoint",
    "UnboundedBelowError",
    "Uniform",
    "UnsupportedSetError",
    "VarianceSuiteSummary",
    "alpha_chain_margin",
    "bobkov_goetze_constant",
    "certify_exponential_increment",
    "certify_halfline_increment",
    "certify_poincare_to_tail",
    "certify_tail_to_tau",
    "certify_tau_to_poincare",
    "cost_ball_member",
    "cost_ball_support",
    "cp_lower_bound",
    "default_exponential_suite",
    "default_halfline_suite",
    "deviation_exponent_slack",
    "deviation_function_from_dict",
    "dirichlet_energy",
    "discrete_gradient",
    "enlargement_member",
    "envelope_drop_certificate",
    "hinge",
    "increment_alpha",
    "infconv_exact",
    "infconv_grid",
    "lambda_star",
    "measure_from_dict",
    "muckenhoupt_constant",
    "product_from_dict",
    "random_plconvex",
    "record_line",
    "render_records",
    "render_table",
    "restrict_positive",
    "sanitize",
    "set_from_dict",
    "tau_functional",
    "truncate_slopes",
    "variance",
    "verify_cost_ball_enlargement",
    "verify_lipschitz_deviation",
    "verify_two_level_enlargement",
    "wilson_interval",
]
