"""Low-rank approximation of entrywise power-transformed factored matrices.

The implicit object is f(left @ right) for a factor pair and a scalar
transform f; the package provides exact entry/matvec access, tensored
linearizations, Gaussian and tensor sketching, relative- and additive-error
rank-k solvers, leverage scores, the orthogonal-vectors reduction harness,
and dense brute-force oracles for validation.
"""

from .container import load_csv, load_factors, load_matrix, save_factors, save_matrix
from .errors import (
    ConfigError,
    ContractViolationError,
    DimensionError,
    ResourceLimitError,
    UnsupportedTransformError,
)
from .generate import planted_ovp, random_factors
from .leverage import LeverageScores, exact_leverage, sketched_leverage, threshold_support
from .lra import (
    ProjectionOutput,
    RankKFactors,
    additive_lra,
    compute_L2,
    power_lra,
    projection_from_factors,
    relative_lra,
)
from .reduction import (
    OvpInstance,
    ReductionTrace,
    build_factors,
    column_residuals,
    oracle_backend,
    relative_backend,
    run_reduction,
)
from .sketch import (
    GaussianSketch,
    TensorSketchOp,
    approx_matrix_product_check,
    gaussian_apply,
    tensorsketch_apply_row,
    tensorsketch_cols,
    tensorsketch_rows,
)
from .tensoring import TensoredFactor, expand, expand_row, tensored_matvec
from .transform import (
    FactoredMatrix,
    ScalarTransform,
    abs_power,
    entry,
    log1p_abs,
    power,
    transformed_matvec,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContractViolationError",
    "DimensionError",
    "FactoredMatrix",
    "GaussianSketch",
    "LeverageScores",
    "OvpInstance",
    "ProjectionOutput",
    "RankKFactors",
    "ReductionTrace",
    "ResourceLimitError",
    "ScalarTransform",
    "TensorSketchOp",
    "TensoredFactor",
    "UnsupportedTransformError",
    "abs_power",
    "additive_lra",
    "approx_matrix_product_check",
    "build_factors",
    "column_residuals",
    "compute_L2",
    "entry",
    "exact_leverage",
    "expand",
    "expand_row",
    "gaussian_apply",
    "load_csv",
    "load_factors",
    "load_matrix",
    "log1p_abs",
    "oracle_backend",
    "planted_ovp",
    "power",
    "power_lra",
    "projection_from_factors",
    "random_factors",
    "relative_backend",
    "relative_lra",
    "run_reduction",
    "save_factors",
    "save_matrix",
    "sketched_leverage",
    "tensored_matvec",
    "tensorsketch_apply_row",
    "tensorsketch_cols",
    "tensorsketch_rows",
    "threshold_support",
    "transformed_matvec",
]
