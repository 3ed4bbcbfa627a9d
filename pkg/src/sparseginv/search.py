"""Local searches over r x r nonsingular submatrices, plus the pipelines.

The determinant searches look for a (1+eps)-local maximizer of
``|det A[S,T]|`` under single index swaps.  Swap ratios are read off in
batch from ``C = A[S,T]^-1 A[S,:]`` (Cramer's rule): replacing column
``T[p]`` by column ``j`` scales ``|det|`` by ``|C[p,j]|``.  For principal
submatrices of a symmetric rank-r matrix the factor is ``C[p,j]**2``.
The block is refactored from scratch after every accepted swap.

The 1-norm search instead looks for a local minimizer of
``||A[S,T]^-1||_1``; neighbor inverses come from a Sherman-Morrison
update of the current inverse.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .blocks import (
    GinvResult,
    SwapRecord,
    column_block,
    general_block,
    index_set,
    symmetric_block,
)
from .errors import (
    InvalidParams,
    NotSymmetric,
    NumericalBreakdown,
    SweepLimitExceeded,
    ZeroMatrix,
)
from .linalg import DEFAULT_TOL, ToleranceConfig

# floor on the acceptance threshold, so eps = 0 cannot cycle on roundoff
RATIO_GUARD = 1e-12
# computed Cramer ratios carry relative error of order cond(A[S,T]) * eps;
# swaps within that band are indistinguishable from ties and are refused
NOISE_FACTOR = 16.0
PIVOT_STRATEGIES = ("first_improving", "best_improving")


@dataclass(frozen=True)
class SearchConfig:
    epsilon: float = 0.0
    max_sweeps: int | None = None  # None -> 10 * (number of columns)
    pivot_strategy: str = "first_improving"
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise InvalidParams("epsilon must be >= 0")
        if self.pivot_strategy not in PIVOT_STRATEGIES:
            raise InvalidParams(f"pivot_strategy must be one of {PIVOT_STRATEGIES}")
        if self.max_sweeps is not None and self.max_sweeps < 0:
            raise InvalidParams("max_sweeps must be >= 0")

    @property
    def threshold(self) -> float:
        return 1.0 + max(self.epsilon, RATIO_GUARD)

    def sweep_cap(self, n: int) -> int:
        return 10 * n if self.max_sweeps is None else self.max_sweeps


DEFAULT_CONFIG = SearchConfig()


@dataclass
class SearchOutcome:
    S: tuple
    T: tuple
    trace: list = field(default_factory=list)
    converged: bool = True

    @property
    def iterations(self) -> int:
        return len(self.trace)


# ---------------------------------------------------------------- init


def init_general(A, tol: ToleranceConfig = DEFAULT_TOL, rank: int | None = None):
    """Rows ``S`` and columns ``T`` of a nonsingular r x r submatrix.

    Gaussian elimination with complete pivoting, run for ``r`` steps.
    Returned index sets are sorted.
    """
    A = linalg.as_matrix(A)
    r = linalg.numerical_rank(A, tol) if rank is None else rank
    if r == 0:
        raise ZeroMatrix("A has rank 0")
    R = A.copy()
    S, T = [], []
    for _ in range(r):
        i, j = np.unravel_index(np.argmax(np.abs(R)), R.shape)
        piv = R[i, j]
        if piv == 0.0:
            raise NumericalBreakdown("elimination ran out of pivots before rank r")
        R -= np.outer(R[:, j], R[i, :] / piv)
        R[i, :] = 0.0
        R[:, j] = 0.0
        S.append(int(i))
        T.append(int(j))
    return tuple(sorted(S)), tuple(sorted(T))


BK_ALPHA = (1 + np.sqrt(17)) / 8


def init_principal(A, tol: ToleranceConfig = DEFAULT_TOL, rank: int | None = None) -> tuple:
    """Indices ``S`` with ``A[S,S]`` nonsingular and ``|S| = rank(A)``.

    Symmetric elimination with Bunch-Kaufman style pivot choice: a 1x1
    diagonal pivot when the largest remaining diagonal is at least
    ``BK_ALPHA`` times the largest off-diagonal, otherwise the 2x2 block
    around the largest off-diagonal entry.
    """
    A = linalg.as_matrix(A)
    if not linalg.is_symmetric(A, tol):
        raise NotSymmetric("init_principal needs a symmetric A")
    r = linalg.numerical_rank(A, tol) if rank is None else rank
    if r == 0:
        raise ZeroMatrix("A has rank 0")
    n = A.shape[0]
    R = 0.5 * (A + A.T)
    S: list[int] = []
    while len(S) < r:
        free = np.array([i for i in range(n) if i not in S])
        sub = np.abs(R[np.ix_(free, free)])
        diag = np.diag(sub).copy()
        np.fill_diagonal(sub, 0.0)
        dmax = diag.max()
        omax = sub.max() if free.size > 1 else 0.0
        if dmax == 0.0 and omax == 0.0:
            raise NumericalBreakdown("symmetric elimination ran out of pivots before rank r")
        if r - len(S) == 1 or dmax >= BK_ALPHA * omax:
            i = int(free[np.argmax(diag)])
            R -= np.outer(R[:, i], R[i, :] / R[i, i])
            piv = [i]
        else:
            a, b = np.unravel_index(np.argmax(sub), sub.shape)
            piv = [int(free[a]), int(free[b])]
            B = R[np.ix_(piv, piv)]
            R -= R[:, piv] @ np.linalg.solve(B, R[piv, :])
        R[piv, :] = 0.0
        R[:, piv] = 0.0
        S.extend(piv)
    return tuple(sorted(S))


# ---------------------------------------------------------------- swap selection


def _choose(ratios: np.ndarray, out_ids: Sequence[int], in_ids: Sequence[int], threshold: float, strategy: str):
    """Pick ``(p, q)`` with ``ratios[p, q] > threshold`` or return ``None``.

    ``out_ids[p]`` / ``in_ids[q]`` are the index values that leave/enter.
    first_improving scans out-index ascending, then in-index ascending;
    best_improving takes the largest ratio, ties broken the same way.
    """
    ok = ratios > threshold
    if not ok.any():
        return None
    out_order = np.argsort(out_ids, kind="stable")
    in_order = np.argsort(in_ids, kind="stable")
    ok = ok[np.ix_(out_order, in_order)]
    if strategy == "best_improving":
        vals = np.where(ok, ratios[np.ix_(out_order, in_order)], -np.inf)
        top = vals.max()
        ok = vals >= top * (1 - 1e-12)
    p, q = np.argwhere(ok)[0]
    return int(out_order[p]), int(in_order[q])


def _threshold(block: np.ndarray, cfg: "SearchConfig") -> float:
    noise = NOISE_FACTOR * np.finfo(float).eps * linalg.condition_number(block)
    return max(cfg.threshold, 1.0 + noise)


def _cap_hit(outcome: SearchOutcome, what: str) -> SearchOutcome:
    outcome.converged = False
    warnings.warn(f"{what}: sweep limit reached after {outcome.iterations} swaps", SweepLimitExceeded, stacklevel=3)
    return outcome


def _column_step(A, S, T, cfg):
    """One column-side improvement step; returns (p, j, ratio) or None."""
    B = A[np.ix_(S, T)]
    C = linalg.solve(B, A[list(S), :], cfg.tol)
    ratios = np.abs(C)
    ratios[:, list(T)] = 0.0
    pick = _choose(ratios, T, range(A.shape[1]), _threshold(B, cfg), cfg.pivot_strategy)
    if pick is None:
        return None
    p, j = pick
    return p, j, float(ratios[p, j])


def _row_step(A, S, T, cfg):
    B = A[np.ix_(S, T)]
    R = linalg.solve(B.T, A[:, list(T)].T, cfg.tol)  # r x m, = (A[:,T] B^-1)^T
    ratios = np.abs(R)
    ratios[:, list(S)] = 0.0
    pick = _choose(ratios, S, range(A.shape[0]), _threshold(B, cfg), cfg.pivot_strategy)
    if pick is None:
        return None
    p, i = pick
    return p, i, float(ratios[p, i])


def _replace(idx: tuple, p: int, new: int) -> tuple:
    out = list(idx)
    out[p] = new
    return tuple(out)


def local_search_columns(A, S: Sequence[int], T: Sequence[int], cfg: SearchConfig = DEFAULT_CONFIG) -> SearchOutcome:
    """Column swaps with rows ``S`` fixed until ``A[S,T]`` is (1+eps)-locally maximal."""
    A = linalg.as_matrix(A)
    S = index_set(S, A.shape[0], "S")
    T = index_set(T, A.shape[1], "T")
    out = SearchOutcome(S, T)
    cap = cfg.sweep_cap(A.shape[1])
    while True:
        step = _column_step(A, S, T, cfg)
        if step is None:
            return out
        if out.iterations >= cap:
            return _cap_hit(out, "local_search_columns")
        p, j, ratio = step
        out.trace.append(SwapRecord(T[p], j, "column", ratio))
        T = _replace(T, p, j)
        out.T = T


def local_search_principal(A, S: Sequence[int], cfg: SearchConfig = DEFAULT_CONFIG) -> SearchOutcome:
    """Principal swaps on symmetric rank-r ``A``.

    Swapping ``S[p]`` for ``j`` scales ``|det A[S,S]|`` by ``x_p**2`` where
    ``A[S,S] x = A[S,j]``.
    """
    A = linalg.as_matrix(A)
    if not linalg.is_symmetric(A, cfg.tol):
        raise NotSymmetric("local_search_principal needs a symmetric A")
    n = A.shape[0]
    S = index_set(S, n, "S")
    out = SearchOutcome(S, S)
    cap = cfg.sweep_cap(n)
    while True:
        B = A[np.ix_(S, S)]
        X = linalg.solve(B, A[list(S), :], cfg.tol)
        ratios = X * X
        ratios[:, list(S)] = 0.0
        pick = _choose(ratios, S, range(n), _threshold(B, cfg), cfg.pivot_strategy)
        if pick is None:
            return out
        if out.iterations >= cap:
            return _cap_hit(out, "local_search_principal")
        p, j = pick
        out.trace.append(SwapRecord(S[p], j, "principal", float(ratios[p, j])))
        S = _replace(S, p, j)
        out.S = out.T = S


def local_search_general(A, S: Sequence[int], T: Sequence[int], cfg: SearchConfig = DEFAULT_CONFIG) -> SearchOutcome:
    """Alternate column and row sweeps until neither side has an improving swap."""
    A = linalg.as_matrix(A)
    m, n = A.shape
    S = index_set(S, m, "S")
    T = index_set(T, n, "T")
    out = SearchOutcome(S, T)
    cap = cfg.sweep_cap(max(m, n))
    while True:
        moved = False
        for side in ("column", "row"):
            while True:
                step = _column_step(A, S, T, cfg) if side == "column" else _row_step(A, S, T, cfg)
                if step is None:
                    break
                if out.iterations >= cap:
                    return _cap_hit(out, "local_search_general")
                p, k, ratio = step
                moved = True
                if side == "column":
                    out.trace.append(SwapRecord(T[p], k, "column", ratio))
                    T = _replace(T, p, k)
                else:
                    out.trace.append(SwapRecord(S[p], k, "row", ratio))
                    S = _replace(S, p, k)
                out.S, out.T = S, T
        if not moved:
            return out


# ---------------------------------------------------------------- 1-norm search

ONENORM_GUARD = 1e-12
# |det| ratio below which a neighbor block counts as singular
SINGULAR_RATIO = 1e-12


def _onenorm_neighbors(A, S, T, N):
    """Yield ``(side, p, k, norm)`` for every nonsingular single-swap neighbor.

    ``N`` is the inverse of ``A[S,T]``.  Column swap ``T[p] -> k``:
    ``N' = N - (c - e_p) N[p,:] / c_p`` with ``c = N A[S,k]``.  Row swap
    ``S[p] -> i``: ``N' = N - N[:,p] (rho - e_p)^T / rho_p`` with
    ``rho = N^T A[i,T]``.
    """
    m, n = A.shape
    Tset, Sset = set(T), set(S)
    C = N @ A[list(S), :]
    for p_order in np.argsort(T, kind="stable"):
        p = int(p_order)
        for k in range(n):
            if k in Tset or abs(C[p, k]) <= SINGULAR_RATIO:
                continue
            c = C[:, k].copy()
            c[p] -= 1.0
            Nn = N - np.outer(c, N[p, :] / C[p, k])
            yield "column", p, k, linalg.one_norm(Nn)
    Rho = A[:, list(T)] @ N  # row i -> rho_i^T
    for p_order in np.argsort(S, kind="stable"):
        p = int(p_order)
        for i in range(m):
            if i in Sset or abs(Rho[i, p]) <= SINGULAR_RATIO:
                continue
            rho = Rho[i, :].copy()
            rho[p] -= 1.0
            Nn = N - np.outer(N[:, p] / Rho[i, p], rho)
            yield "row", p, i, linalg.one_norm(Nn)


def local_search_onenorm(A, S: Sequence[int], T: Sequence[int], cfg: SearchConfig = DEFAULT_CONFIG) -> SearchOutcome:
    """Local minimizer of ``||A[S,T]^-1||_1`` over single row or column swaps.

    A neighbor is accepted only if it lowers the norm by a relative
    ``ONENORM_GUARD``, which rules out cycling among equal-norm blocks.
    """
    A = linalg.as_matrix(A)
    m, n = A.shape
    S = index_set(S, m, "S")
    T = index_set(T, n, "T")
    out = SearchOutcome(S, T)
    cap = cfg.sweep_cap(max(m, n))
    while True:
        N = linalg.inverse(A[np.ix_(S, T)], cfg.tol)
        cur = linalg.one_norm(N)
        best = None
        for side, p, k, val in _onenorm_neighbors(A, S, T, N):
            if val < cur * (1 - ONENORM_GUARD) and (best is None or val < best[3] * (1 - ONENORM_GUARD)):
                best = (side, p, k, val)
                if cfg.pivot_strategy == "first_improving":
                    break
        if best is None:
            return out
        if out.iterations >= cap:
            return _cap_hit(out, "local_search_onenorm")
        side, p, k, val = best
        if side == "column":
            out.trace.append(SwapRecord(T[p], k, "column", cur / val))
            T = _replace(T, p, k)
        else:
            out.trace.append(SwapRecord(S[p], k, "row", cur / val))
            S = _replace(S, p, k)
        out.S, out.T = S, T


# ---------------------------------------------------------------- pipelines


def sym_reflexive_ginv(A, cfg: SearchConfig = DEFAULT_CONFIG) -> GinvResult:
    """Symmetric reflexive generalized inverse of symmetric ``A``.

    ``||H||_1 <= r^2 (1+eps)`` times the optimum of the symmetric problem.
    """
    A = linalg.as_matrix(A)
    if not linalg.is_symmetric(A, cfg.tol):
        raise NotSymmetric("sym_reflexive_ginv needs a symmetric A")
    r = linalg.numerical_rank(A, cfg.tol)
    S0 = init_principal(A, cfg.tol, rank=r)
    h0 = symmetric_block(A, S0, cfg.tol, rank=r)
    found = local_search_principal(A, S0, cfg)
    res = symmetric_block(A, found.S, cfg.tol, rank=r)
    res.trace, res.converged, res.init_one_norm = found.trace, found.converged, h0.one_norm
    return res


def ah_symmetric_ginv(A, cfg: SearchConfig = DEFAULT_CONFIG) -> GinvResult:
    """ah-symmetric reflexive generalized inverse within ``r (1+eps)`` of optimal."""
    A = linalg.as_matrix(A)
    r = linalg.numerical_rank(A, cfg.tol)
    S, T0 = init_general(A, cfg.tol, rank=r)
    h0 = column_block(A, T0, cfg.tol, S=S, rank=r)
    found = local_search_columns(A, S, T0, cfg)
    res = column_block(A, found.T, cfg.tol, S=S, rank=r)
    res.trace, res.converged, res.init_one_norm = found.trace, found.converged, h0.one_norm
    return res


def ha_symmetric_ginv(A, cfg: SearchConfig = DEFAULT_CONFIG) -> GinvResult:
    """ha-symmetric version: the ah pipeline on ``A^T``, transposed back.

    In the result ``S`` are the rows of ``A`` whose pseudoinverse fills
    ``H`` and ``T`` the columns held fixed during the search.
    """
    A = linalg.as_matrix(A)
    t = ah_symmetric_ginv(A.T, cfg)
    H = np.ascontiguousarray(t.H.T)
    return GinvResult(
        H=H, kind="ha", S=t.T, T=t.S, one_norm=t.one_norm, nnz=t.nnz,
        trace=[SwapRecord(s.out_index, s.in_index, "row", s.ratio) for s in t.trace],
        converged=t.converged, init_one_norm=t.init_one_norm,
    )


def general_reflexive_ginv(A, cfg: SearchConfig = DEFAULT_CONFIG) -> GinvResult:
    A = linalg.as_matrix(A)
    r = linalg.numerical_rank(A, cfg.tol)
    S0, T0 = init_general(A, cfg.tol, rank=r)
    h0 = general_block(A, S0, T0, cfg.tol, rank=r)
    found = local_search_general(A, S0, T0, cfg)
    res = general_block(A, found.S, found.T, cfg.tol, rank=r)
    res.trace, res.converged, res.init_one_norm = found.trace, found.converged, h0.one_norm
    return res


PIPELINES = {
    "sym": sym_reflexive_ginv,
    "ah": ah_symmetric_ginv,
    "ha": ha_symmetric_ginv,
    "general": general_reflexive_ginv,
}
