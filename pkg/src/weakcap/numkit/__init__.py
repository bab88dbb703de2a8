"""Numerical foundation: quadrature, symmetric eigensolver, tridiagonal solves."""
from .linalg import (
    ConvergenceError,
    NotPositiveDefiniteError,
    TridiagMatrix,
    as_sym_matrix,
    cholesky,
    is_psd,
    psd_tolerance,
    spd_inverse,
    sym_eigen,
    trace_product,
    tridiag_solve,
)
from .quadrature import (
    QuadratureError,
    QuadratureResult,
    integrate,
    integrate_real_line,
    integrate_semi_infinite,
    quadrature_rule,
    real_line_rule,
    semi_infinite_rule,
)

__all__ = [
    "ConvergenceError", "NotPositiveDefiniteError", "TridiagMatrix", "as_sym_matrix",
    "cholesky", "is_psd", "psd_tolerance", "spd_inverse", "sym_eigen", "trace_product",
    "tridiag_solve", "QuadratureError", "QuadratureResult", "integrate",
    "integrate_real_line", "integrate_semi_infinite", "quadrature_rule",
    "real_line_rule", "semi_infinite_rule",
]
