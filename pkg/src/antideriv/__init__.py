"""Non-Archimedean antiderivational calculus over Q_p and K(alpha)."""
from .antiderivation import AntiderivationPlan, antiderive_point, make_plan, sigma
from .cauchy import (cauchy_constant, cauchy_eval, compute_C_alpha, laurent_coeffs, residue,
                     residue_at_A)
from .expr import evaluate, parse_expr, to_text
from .kernels import KernelConfig, bochner_ops, mb_kernel
from .opcalc import MatrixOverExt, func_calc
from .padic import (Ball, ExtElement, PAdicNumber, PrecisionContext, beta_element,
                    conjugate, ext_wirtinger_coords, field_arith, format_ext, triangle_compare)

__all__ = [
    "AntiderivationPlan", "Ball", "ExtElement", "KernelConfig", "MatrixOverExt", "PAdicNumber",
    "PrecisionContext", "antiderive_point", "beta_element", "bochner_ops", "cauchy_constant",
    "cauchy_eval", "compute_C_alpha", "conjugate", "evaluate", "ext_wirtinger_coords",
    "field_arith", "format_ext", "func_calc", "laurent_coeffs", "make_plan", "mb_kernel",
    "parse_expr", "residue", "residue_at_A", "sigma", "to_text", "triangle_compare",
]
