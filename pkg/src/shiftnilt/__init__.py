"""Numerical inverse Laplace transformation with Euler and CME weights and optimal shifting."""
from .cme import cme_coefficients, cme_n_for_order
from .euler import euler_coefficients, euler_n_for_order
from .expr import expression_query, parse
from .framework import (
    AccuracyWarning,
    CoefficientSet,
    ConvergenceRegionError,
    DivergentIntegralError,
    Method,
    NiltError,
    NiltResult,
    TransformEvaluationError,
    TransformQuery,
    evaluate_nilt,
    evaluate_nilt_mp,
    shift_coefficients,
    weight_function_value,
)
from .kernels import BACKEND
from .shift import EulerShiftWarning, ShiftSearchConfig, cme_s, euler_s
from .transforms import builtin, builtin_registry
from .weights import decompose_weight, quadrature_oracle

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "BACKEND",
    "CoefficientSet",
    "ConvergenceRegionError",
    "DivergentIntegralError",
    "EulerShiftWarning",
    "Method",
    "NiltError",
    "NiltResult",
    "ShiftSearchConfig",
    "TransformEvaluationError",
    "TransformQuery",
    "builtin",
    "builtin_registry",
    "cme_coefficients",
    "cme_n_for_order",
    "cme_s",
    "decompose_weight",
    "euler_coefficients",
    "euler_n_for_order",
    "euler_s",
    "evaluate_nilt",
    "evaluate_nilt_mp",
    "expression_query",
    "parse",
    "quadrature_oracle",
    "shift_coefficients",
    "weight_function_value",
]
