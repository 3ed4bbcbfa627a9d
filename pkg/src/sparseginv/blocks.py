"""Block constructions of reflexive generalized inverses.

Every construction places the inverse (or left pseudoinverse) of a
rank-sized submatrix of ``A`` into an otherwise-zero ``H``:

* :func:`symmetric_block` -- ``H[S,S] = A[S,S]^-1`` for symmetric ``A``
  (P1, P2, H symmetric).
* :func:`column_block` -- rows ``T`` of ``H`` hold ``A[:,T]^+`` (P1, P2, P3).
* :func:`row_block` -- columns ``S`` of ``H`` hold ``A[S,:]^+`` (P1, P2, P4).
* :func:`general_block` -- ``H[T,S] = A[S,T]^-1`` (P1, P2).

Index sets are tuples of distinct 0-based ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import (
    InvalidIndexSet,
    NotSymmetric,
    RankDeficientBlock,
    SingularBlock,
    SingularMatrix,
    WrongCardinality,
    WrongRank,
)
from .linalg import DEFAULT_TOL, ToleranceConfig

KINDS = ("symmetric", "ah", "ha", "general")


@dataclass(frozen=True)
class SwapRecord:
    """One accepted local-search move.

    ``ratio`` is the improvement factor: ``|det|`` grows by ``ratio`` for
    the determinant searches, ``||inv||_1`` shrinks by ``ratio`` for the
    1-norm search.
    """

    out_index: int
    in_index: int
    side: str  # "row", "column" or "principal"
    ratio: float


@dataclass
class GinvResult:
    H: np.ndarray
    kind: str
    S: tuple = ()
    T: tuple = ()
    one_norm: float = 0.0
    nnz: int = 0
    trace: list = field(default_factory=list)
    converged: bool = True
    init_one_norm: float | None = None

    @property
    def swaps(self) -> int:
        return len(self.trace)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "S": list(self.S),
            "T": list(self.T),
            "one_norm": self.one_norm,
            "nnz": self.nnz,
            "swaps": self.swaps,
            "converged": self.converged,
            "init_one_norm": self.init_one_norm,
            "trace": [vars(t) for t in self.trace],
        }


def index_set(indices: Iterable[int], universe: int, name: str = "index set") -> tuple:
    """Validate an ordered, duplicate-free index set within ``range(universe)``."""
    idx = tuple(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise InvalidIndexSet(f"{name} has duplicates: {idx}")
    bad = [i for i in idx if not 0 <= i < universe]
    if bad:
        raise InvalidIndexSet(f"{name} entries {bad} outside [0, {universe})")
    return idx


def _finish(A: np.ndarray, H: np.ndarray, kind: str, S, T, tol: ToleranceConfig) -> GinvResult:
    return GinvResult(
        H=H,
        kind=kind,
        S=tuple(S),
        T=tuple(T),
        one_norm=linalg.one_norm(H),
        nnz=linalg.nnz(H, tol),
    )


def _check_cardinality(k: int, r: int, what: str):
    if k != r:
        raise WrongCardinality(f"|{what}| = {k} but rank(A) = {r}")


def symmetric_block(A, S: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL, rank: int | None = None) -> GinvResult:
    A = linalg.as_matrix(A)
    if not linalg.is_symmetric(A, tol):
        raise NotSymmetric("symmetric_block needs a symmetric A")
    n = A.shape[0]
    S = index_set(S, n, "S")
    r = linalg.numerical_rank(A, tol) if rank is None else rank
    _check_cardinality(len(S), r, "S")
    ix = np.ix_(S, S)
    try:
        N = linalg.inverse(A[ix], tol)
    except SingularMatrix as exc:
        raise SingularBlock(f"A[S,S] is singular for S={S}") from exc
    H = np.zeros((n, n))
    H[ix] = 0.5 * (N + N.T)
    return _finish(A, H, "symmetric", S, S, tol)


def left_pseudoinverse(Ahat: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``(Ahat^T Ahat)^-1 Ahat^T`` for full column rank ``Ahat``, via thin QR."""
    Q, R = np.linalg.qr(Ahat)
    d = np.abs(np.diag(R))
    if d.size and (d.max() == 0.0 or d.min() <= tol.rank_rel_tol * d.max() * max(Ahat.shape)):
        raise RankDeficientBlock("selected columns are not linearly independent")
    return sla.solve_triangular(R, Q.T, check_finite=False)


def column_block(A, T: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL, S: Sequence[int] = (), rank: int | None = None) -> GinvResult:
    """ah-symmetric reflexive generalized inverse supported on rows ``T``.

    ``S`` is carried into the result as metadata only (the rows that a
    determinant search held fixed); it does not affect ``H``.
    """
    A = linalg.as_matrix(A)
    m, n = A.shape
    T = index_set(T, n, "T")
    r = linalg.numerical_rank(A, tol) if rank is None else rank
    _check_cardinality(len(T), r, "T")
    H = np.zeros((n, m))
    H[list(T), :] = left_pseudoinverse(A[:, list(T)], tol)
    return _finish(A, H, "ah", S, T, tol)


def row_block(A, S: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL, T: Sequence[int] = (), rank: int | None = None) -> GinvResult:
    """ha-symmetric counterpart of :func:`column_block`, built on ``A^T``."""
    A = linalg.as_matrix(A)
    res = column_block(A.T, S, tol, rank=rank)
    H = np.ascontiguousarray(res.H.T)
    return _finish(A, H, "ha", S, T, tol)


def general_block(A, S: Sequence[int], T: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL, rank: int | None = None) -> GinvResult:
    A = linalg.as_matrix(A)
    m, n = A.shape
    S = index_set(S, m, "S")
    T = index_set(T, n, "T")
    r = linalg.numerical_rank(A, tol) if rank is None else rank
    _check_cardinality(len(S), r, "S")
    _check_cardinality(len(T), r, "T")
    try:
        N = linalg.inverse(A[np.ix_(S, T)], tol)
    except SingularMatrix as exc:
        raise SingularBlock(f"A[S,T] is singular for S={S}, T={T}") from exc
    H = np.zeros((n, m))
    H[np.ix_(T, S)] = N
    return _finish(A, H, "general", S, T, tol)


def rank1_column(A, tol: ToleranceConfig = DEFAULT_TOL) -> GinvResult:
    """Optimal ah-symmetric reflexive generalized inverse of a rank-1 matrix.

    Picks the column minimizing ``||a^+||_1 = ||a||_1 / ||a||_2^2``; ties
    (within a relative 1e-12) go to the lowest column index.
    """
    A = linalg.as_matrix(A)
    r = linalg.numerical_rank(A, tol)
    if r != 1:
        raise WrongRank(f"rank1_column needs rank 1, got rank {r}")
    floor = tol.rank_rel_tol * linalg.max_norm(A)
    best, best_j = np.inf, -1
    for j in range(A.shape[1]):
        a = A[:, j]
        if np.abs(a).max() <= floor:
            continue
        val = np.abs(a).sum() / (a @ a)
        if val < best * (1 - 1e-12):
            best, best_j = val, j
    return column_block(A, (best_j,), tol, rank=1)
