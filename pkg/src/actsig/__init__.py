"""Integral signatures of activation functions under Gaussian inputs."""

__version__ = "0.1.0"

from .activations import (  # noqa: E402
    Activation, AffineParams, Finiteness, TaxonomyClass, affine_wrap, builtin, classify,
)
from .errors import (  # noqa: E402
    ActsigError, ArgumentError, CapabilityError, ConvergenceError, DomainError, EvaluationError,
    MetadataError, PropertyFailure, RegistryError, SignatureError,
)
from .kernel import KernelBoundReport, bound_stress, bv_bound, g4_bound, mc_mixed_hessian  # noqa: E402
from .lyapunov import (  # noqa: E402
    ContractionCertificate, certify_contraction, f_lyapunov_descent, l2_contraction_check, verify_descent,
)
from .montecarlo import EstimateWithError, mc_components  # noqa: E402
from .propagation import (  # noqa: E402
    CriticalityGrid, FixedPointReport, bias_drift_check, criticality_scan, crude_bias_bound,
    solve_fixed_point, variance_map,
)
from .quadrature import GaussianLaw, QuadratureRule, build_rule, gauss_expect, integrate_line  # noqa: E402
from .signature import (  # noqa: E402
    Signature, affine_signature_law, full_signature, gaussian_components, signature_under_law,
)
from .tails import (  # noqa: E402
    ResidualProfile, compensated_primitive, residual_profile, slope_moment_upper_bounds, tv_slope,
    weighted_slope_bound,
)

__all__ = [
    "Activation", "AffineParams", "Finiteness", "TaxonomyClass", "affine_wrap", "builtin", "classify",
    "ActsigError", "ArgumentError", "CapabilityError", "ConvergenceError", "DomainError", "EvaluationError",
    "MetadataError", "PropertyFailure", "RegistryError", "SignatureError",
    "KernelBoundReport", "bound_stress", "bv_bound", "g4_bound", "mc_mixed_hessian",
    "ContractionCertificate", "certify_contraction", "f_lyapunov_descent", "l2_contraction_check", "verify_descent",
    "EstimateWithError", "mc_components",
    "CriticalityGrid", "FixedPointReport", "bias_drift_check", "criticality_scan", "crude_bias_bound",
    "solve_fixed_point", "variance_map",
    "GaussianLaw", "QuadratureRule", "build_rule", "gauss_expect", "integrate_line",
    "Signature", "affine_signature_law", "full_signature", "gaussian_components", "signature_under_law",
    "ResidualProfile", "compensated_primitive", "residual_profile", "slope_moment_upper_bounds", "tv_slope",
    "weighted_slope_bound",
]
