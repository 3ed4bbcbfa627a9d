"""Dense real linear algebra primitives.

Matrices are plain 2-D float64 :class:`numpy.ndarray` objects; use
:func:`as_matrix` at API boundaries to validate shape and finiteness.
Norms here are *entrywise* (``one_norm(H)`` is ``sum(|h_ij|)``), never
operator norms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidMatrix, InvalidParams, ShapeMismatch, SingularMatrix

# |pivot| below this fraction of max|a_ij| declares singularity
PIVOT_REL_TOL = 1e-14


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical cutoffs shared by every module.

    rank_rel_tol
        singular values ``<= rank_rel_tol * sigma_1`` count as zero.
    nnz_tol
        entries with ``|h| <= nnz_tol`` count as zero in :func:`nnz`.
    residual_tol
        acceptance threshold for property residuals, scaled by the size
        of ``A`` where a check says so.
    """

    rank_rel_tol: float = 1e-12
    nnz_tol: float = 1e-6
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "nnz_tol", "residual_tol"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"{name} must be positive")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Return ``A`` as a finite 2-D float64 array (copying only if needed)."""
    M = np.asarray(A, dtype=float)
    if M.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return M


def _require_square(A: np.ndarray, name: str = "A"):
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got {A.shape}")


def singular_values(A) -> np.ndarray:
    A = as_matrix(A)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def numerical_rank(A, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Count singular values above ``tol.rank_rel_tol * sigma_1``."""
    s = singular_values(A)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel_tol * s[0]))


def pseudoinverse(A, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse ``V diag(1/sigma) U^T`` from a thin SVD.

    Singular values at or below the rank cutoff are inverted to zero.
    """
    A = as_matrix(A)
    m, n = A.shape
    if A.size == 0:
        return np.zeros((n, m))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > tol.rank_rel_tol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def _lu(A: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    return lu, piv


def _is_singular_lu(lu: np.ndarray, scale: float) -> bool:
    if scale == 0.0:
        return True
    return bool(np.min(np.abs(np.diag(lu))) < PIVOT_REL_TOL * scale)


def det(A) -> float:
    """Determinant from an LU factorization with partial pivoting."""
    A = as_matrix(A)
    _require_square(A)
    if A.shape[0] == 0:
        return 1.0
    lu, piv = _lu(A)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    d = float(np.prod(np.diag(lu)))
    return -d if swaps % 2 else d


def solve(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Solve ``A X = B`` for square nonsingular ``A``.

    ``B`` may be 1-D (returns 1-D) or 2-D.

    Raises
    ------
    SingularMatrix
        if LU finds a pivot below ``PIVOT_REL_TOL * max|a_ij|``.
    """
    A = as_matrix(A)
    _require_square(A)
    B = np.asarray(B, dtype=float)
    if B.shape[0] != A.shape[0]:
        raise ShapeMismatch(f"B has {B.shape[0]} rows, A is {A.shape}")
    lu, piv = _lu(A)
    if _is_singular_lu(lu, max_norm(A)):
        raise SingularMatrix("matrix is singular to working precision")
    return sla.lu_solve((lu, piv), B, check_finite=False)


def condition_number(A) -> float:
    """LAPACK estimate of the 1-norm condition number; ``inf`` if singular."""
    A = as_matrix(A)
    _require_square(A)
    if A.shape[0] == 0:
        return 1.0
    lu, _ = _lu(A)
    if _is_singular_lu(lu, max_norm(A)):
        return np.inf
    rcond, info = sla.lapack.dgecon(lu, np.abs(A).sum(axis=0).max(), norm="1")
    return np.inf if info != 0 or rcond == 0.0 else 1.0 / rcond


def inverse(A, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    A = as_matrix(A)
    _require_square(A)
    return solve(A, np.eye(A.shape[0]), tol)


def one_norm(H) -> float:
    return float(np.abs(np.asarray(H, dtype=float)).sum())


def max_norm(H) -> float:
    H = np.asarray(H, dtype=float)
    return float(np.abs(H).max()) if H.size else 0.0


def nnz(H, tol: ToleranceConfig | float = DEFAULT_TOL) -> int:
    cutoff = tol.nnz_tol if isinstance(tol, ToleranceConfig) else float(tol)
    return int(np.count_nonzero(np.abs(np.asarray(H, dtype=float)) > cutoff))


def sign(X) -> np.ndarray:
    """Entrywise sign with ``sign(0) = 0``."""
    return np.sign(np.asarray(X, dtype=float))


def symmetry_residual(A) -> float:
    A = as_matrix(A)
    _require_square(A)
    return max_norm(A - A.T)


def is_symmetric(A, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        return False
    return symmetry_residual(A) <= tol.residual_tol * (1.0 + max_norm(A))
