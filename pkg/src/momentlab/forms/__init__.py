"""Concrete level-one modular forms at desk scale.

Three layers wired together:

  qexp       exact integer q-expansions (Eisenstein series, the discriminant
             form, echelonized cusp-form bases) with a Kronecker-substitution
             big-integer multiply;
  eigen      Hecke eigenforms from the exact T_2 matrix, with certified
             rational/irrational eigenvalue handling and normalized
             eigenvalue tables at large prime ranges;
  petersson  Petersson inner products by fundamental-domain quadrature,
             symmetric-square L-values, Kloosterman/Bessel corrections, the
             full trace-formula diagonal, fourth moments, and central values
             via the triple-product inversion.
"""

from .qexp import (
    QExpansion,
    dim_cusp_forms,
    delta_qexp,
    eisenstein_series,
    miller_basis,
)
from .eigen import (
    EigenformData,
    hecke_eigenforms,
    prime_eigenvalue_table,
)
from .petersson import (
    PeterssonResult,
    PrecisionError,
    petersson_inner,
    sym_square_L1,
    sym_square_L1_report,
    prime_lambda_values,
    kloosterman_sum,
    bessel_j_int_order,
    petersson_full_diagonal,
    harmonic_sum_check,
    triple_overlap,
    fourth_moment,
    watson_L_value,
)

__all__ = [
    "QExpansion",
    "dim_cusp_forms",
    "delta_qexp",
    "eisenstein_series",
    "miller_basis",
    "EigenformData",
    "hecke_eigenforms",
    "prime_eigenvalue_table",
    "PeterssonResult",
    "PrecisionError",
    "petersson_inner",
    "sym_square_L1",
    "sym_square_L1_report",
    "prime_lambda_values",
    "kloosterman_sum",
    "bessel_j_int_order",
    "petersson_full_diagonal",
    "harmonic_sum_check",
    "triple_overlap",
    "fourth_moment",
    "watson_L_value",
]
