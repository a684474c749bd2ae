"""Numerical laboratory for p-approximate Schauder frames on (R^d, ||.||_r)."""

__version__ = "0.1.0"

from .frames import (  # noqa: E402
    PASF,
    classify,
    frame_bounds,
    frame_operator,
    is_eps_riesz,
    is_p_orthonormal,
    is_riesz_basis,
    make_pasf,
    recover_intertwiner,
    riesz_sequence_bounds,
)
from .lp_core import (  # noqa: E402
    OperatorNormEstimate,
    dual_exponent,
    gain_lower_bound,
    is_isometry,
    op_norm,
    p_norm,
    signed_permutations,
)
from .reconstruct import check_algorithm_condition, duffin_schaeffer  # noqa: E402

__all__ = [
    "OperatorNormEstimate",
    "PASF",
    "__version__",
    "check_algorithm_condition",
    "classify",
    "dual_exponent",
    "duffin_schaeffer",
    "frame_bounds",
    "frame_operator",
    "gain_lower_bound",
    "is_eps_riesz",
    "is_isometry",
    "is_p_orthonormal",
    "is_riesz_basis",
    "make_pasf",
    "op_norm",
    "p_norm",
    "recover_intertwiner",
    "riesz_sequence_bounds",
    "signed_permutations",
]
