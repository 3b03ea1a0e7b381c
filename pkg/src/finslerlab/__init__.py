"""Numerical curvature engine for Finsler (alpha,beta)-metrics."""

__version__ = "0.1.0"

from .errors import (
    ArityError,
    DegeneratePlane,
    DegenerateValue,
    DomainError,
    ExprSyntaxError,
    FinslerError,
    ManifestError,
    NotEinstein,
    NotPositiveDefinite,
    SingularMetric,
    UnknownIdentifier,
)
from .jets import (
    Jet,
    JetContext,
    constant,
    extract_partial,
    get_context,
    jet_arith,
    jet_func,
    lift_variable,
)
from .exprlang import eval_jet, eval_scalar, parse, to_source
from .core import (
    CurvaturePoint,
    FinslerMetric,
    TangentSample,
    curvature_point,
    einstein_check,
    einstein_scalar,
    flag_curvature,
    fundamental_tensor,
    reversibility_residual,
    ricci,
    riemann_curvature,
    spray,
)
from .alphabeta import (
    AbTensors,
    RiemannData,
    ab_tensors,
    curvature_term_sign,
    randers_ricci,
    ricci_identity_residuals,
    riemann_data,
    structural_spray,
)
from .constructions import (
    EinsteinConditionReport,
    PPowerSpec,
    Sqrt2dFamilySpec,
    killing_deformation,
    positivity_check,
    positivity_sample,
    ppower_metric,
    randers_einstein_residuals,
    ricci_flat_parallel_check,
    riemann_metric,
    sqrt2d_K_from_lambda,
    sqrt2d_base_curvature,
    sqrt2d_einstein_residual,
    sqrt2d_family,
    sqrt2d_flag_curvature,
    sqrt2d_structure_report,
    square_einstein_residuals,
)
from .manifest import load_manifest, validate_manifest
from .runner import run

__all__ = [
    "AbTensors",
    "ArityError",
    "CurvaturePoint",
    "DegeneratePlane",
    "DegenerateValue",
    "DomainError",
    "EinsteinConditionReport",
    "ExprSyntaxError",
    "FinslerError",
    "FinslerMetric",
    "Jet",
    "JetContext",
    "ManifestError",
    "NotEinstein",
    "NotPositiveDefinite",
    "PPowerSpec",
    "RiemannData",
    "SingularMetric",
    "Sqrt2dFamilySpec",
    "TangentSample",
    "UnknownIdentifier",
    "ab_tensors",
    "constant",
    "curvature_point",
    "curvature_term_sign",
    "einstein_check",
    "einstein_scalar",
    "eval_jet",
    "eval_scalar",
    "extract_partial",
    "flag_curvature",
    "fundamental_tensor",
    "get_context",
    "jet_arith",
    "jet_func",
    "killing_deformation",
    "lift_variable",
    "load_manifest",
    "parse",
    "positivity_check",
    "positivity_sample",
    "ppower_metric",
    "randers_einstein_residuals",
    "randers_ricci",
    "reversibility_residual",
    "ricci",
    "ricci_flat_parallel_check",
    "ricci_identity_residuals",
    "riemann_curvature",
    "riemann_data",
    "riemann_metric",
    "run",
    "spray",
    "sqrt2d_K_from_lambda",
    "sqrt2d_base_curvature",
    "sqrt2d_einstein_residual",
    "sqrt2d_family",
    "sqrt2d_flag_curvature",
    "sqrt2d_structure_report",
    "square_einstein_residuals",
    "structural_spray",
    "to_source",
    "validate_manifest",
]
