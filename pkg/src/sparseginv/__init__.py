"""Sparse reflexive generalized inverses by block construction and local search."""

from .blocks import (
    GinvResult,
    SwapRecord,
    column_block,
    general_block,
    left_pseudoinverse,
    rank1_column,
    row_block,
    symmetric_block,
)
from .errors import GinvError, NumericalError, SweepLimitExceeded, ValidationError
from .linalg import DEFAULT_TOL, ToleranceConfig, numerical_rank, one_norm, pseudoinverse
from .lp import LpModel, LpSolution, build_p1, build_p1_sym, build_p13, build_p123, simplex_solve, solve_model
from .search import (
    SearchConfig,
    ah_symmetric_ginv,
    general_reflexive_ginv,
    ha_symmetric_ginv,
    sym_reflexive_ginv,
)
from .verify import Certificate, PropertyReport, certificate_for, certified_ratio, check_properties

__all__ = [
    "DEFAULT_TOL", "Certificate", "GinvError", "GinvResult", "LpModel", "LpSolution",
    "NumericalError", "PropertyReport", "SearchConfig", "SwapRecord", "SweepLimitExceeded",
    "ToleranceConfig", "ValidationError", "ah_symmetric_ginv", "build_p1", "build_p123",
    "build_p13", "build_p1_sym", "certificate_for", "certified_ratio", "check_properties",
    "column_block", "general_block", "general_reflexive_ginv", "ha_symmetric_ginv",
    "left_pseudoinverse", "numerical_rank", "one_norm", "pseudoinverse", "rank1_column",
    "row_block", "simplex_solve", "solve_model", "sym_reflexive_ginv", "symmetric_block",
]
__version__ = "0.1.0"
