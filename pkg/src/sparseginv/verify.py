"""Property checks and dual certificates.

A certificate is a dual point ``W`` (plus a skew ``U`` in the
ah-symmetric case) built in closed form from the block that produced
``H``.  Scaling it by ``s = ||A^T W A^T (+ A^T U)||_max`` makes it dual
feasible, so ``<A,W>/s`` is a lower bound on the minimum 1-norm of any
generalized inverse with the relevant properties, and
``||H||_1 * s / <A,W>`` bounds how far ``H`` is from optimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .blocks import GinvResult, index_set, left_pseudoinverse
from .errors import (
    DegenerateCertificate,
    NotSymmetric,
    ShapeMismatch,
    SingularBlock,
    SingularMatrix,
)
from .linalg import DEFAULT_TOL, ToleranceConfig


@dataclass
class PropertyReport:
    residual_p1: float
    residual_p2: float
    residual_p3: float
    residual_p4: float
    rank_A: int
    rank_H: int
    reflexive: bool
    tolerance: float

    def holds(self, prop: str) -> bool:
        """``holds("p1")`` etc.: residual within the report's tolerance."""
        return getattr(self, f"residual_{prop.lower()}") <= self.tolerance

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d.update({p: self.holds(p) for p in ("p1", "p2", "p3", "p4")})
        return d


def check_properties(A, H, tol: ToleranceConfig = DEFAULT_TOL) -> PropertyReport:
    """Max-norm residuals of the four Moore-Penrose conditions.

    ``reflexive`` means ``rank(H) == rank(A)`` with P1 holding; a
    generalized inverse is reflexive exactly when its rank is minimal.
    The pass/fail tolerance is ``residual_tol * (1 + ||A||_max)``.
    """
    A = linalg.as_matrix(A)
    H = linalg.as_matrix(H, "H")
    m, n = A.shape
    if H.shape != (n, m):
        raise ShapeMismatch(f"H must be {(n, m)} for A of shape {(m, n)}, got {H.shape}")
    AH = A @ H
    HA = H @ A
    rank_A = linalg.numerical_rank(A, tol)
    rank_H = linalg.numerical_rank(H, tol)
    limit = tol.residual_tol * (1.0 + linalg.max_norm(A))
    p1 = linalg.max_norm(AH @ A - A)
    return PropertyReport(
        residual_p1=p1,
        residual_p2=linalg.max_norm(H @ AH - H),
        residual_p3=linalg.max_norm(AH - AH.T),
        residual_p4=linalg.max_norm(HA - HA.T),
        rank_A=rank_A,
        rank_H=rank_H,
        reflexive=bool(p1 <= limit and rank_H == rank_A),
        tolerance=limit,
    )


def least_squares_check(A, H, b) -> float:
    """Normal-equation residual ``||A^T (A H b - b)||_max``.

    Zero (to rounding) whenever ``H`` is an ah-symmetric generalized
    inverse, because then ``x = Hb`` is a least-squares solution.
    """
    A = linalg.as_matrix(A)
    H = linalg.as_matrix(H, "H")
    b = np.asarray(b, dtype=float)
    if H.shape != (A.shape[1], A.shape[0]) or b.shape[0] != A.shape[0]:
        raise ShapeMismatch("shapes of A, H, b do not conform")
    return linalg.max_norm(A.T @ (A @ (H @ b) - b))


@dataclass
class Certificate:
    W: np.ndarray
    dual_objective: float
    feasibility_scale: float
    primal_value: float
    U_factors: tuple | None = None  # (F, G) with U = F G^T - G F^T
    kind: str = "general"

    @property
    def U(self) -> np.ndarray | None:
        if self.U_factors is None:
            return None
        F, G = self.U_factors
        P = F @ G.T
        return P - P.T

    @property
    def implied_lower_bound(self) -> float:
        if self.feasibility_scale == 0.0:
            return 0.0
        return self.dual_objective / self.feasibility_scale

    @property
    def certified_ratio(self) -> float:
        if self.dual_objective <= 0.0:
            return np.inf
        return self.primal_value * self.feasibility_scale / self.dual_objective

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dual_objective": self.dual_objective,
            "feasibility_scale": self.feasibility_scale,
            "implied_lower_bound": self.implied_lower_bound,
            "primal_value": self.primal_value,
            "certified_ratio": self.certified_ratio,
        }


def _block_inverse(A, S, T, tol):
    try:
        return linalg.inverse(A[np.ix_(S, T)], tol)
    except SingularMatrix as exc:
        raise SingularBlock(f"A[S,T] is singular for S={S}, T={T}") from exc


def general_certificate(A, S: Sequence[int], T: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL) -> Certificate:
    """Dual point for ``min{||H||_1 : AHA = A}`` built on block ``A[S,T]``.

    ``W[S,T] = N^T M N^T`` with ``N = A[S,T]^-1`` and ``M = sign(N)``,
    zero elsewhere, so that ``<A,W> = ||N||_1``.
    """
    A = linalg.as_matrix(A)
    m, n = A.shape
    S = index_set(S, m, "S")
    T = index_set(T, n, "T")
    N = _block_inverse(A, S, T, tol)
    M = linalg.sign(N)
    What = N.T @ M @ N.T
    W = np.zeros((m, n))
    W[np.ix_(S, T)] = What
    # A^T W A^T = A[S,:]^T What A[:,T]^T
    Z = A[list(S), :].T @ What @ A[:, list(T)].T
    return Certificate(
        W=W,
        dual_objective=float(np.sum(A * W)),
        feasibility_scale=linalg.max_norm(Z),
        primal_value=linalg.one_norm(N),
        kind="general",
    )


def sym_certificate(A, S: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL) -> Certificate:
    """:func:`general_certificate` on the principal block ``A[S,S]``.

    At a (1+eps)-local maximizer of ``|det A[S,S]|`` the scale is at most
    ``r^2 (1+eps)``.
    """
    A = linalg.as_matrix(A)
    if not linalg.is_symmetric(A, tol):
        raise NotSymmetric("sym_certificate needs a symmetric A")
    cert = general_certificate(A, S, S, tol)
    cert.kind = "symmetric"
    return cert


def ah_certificate(A, S: Sequence[int], T: Sequence[int], tol: ToleranceConfig = DEFAULT_TOL) -> Certificate:
    """Dual point ``(W, U)`` for ``min{||H||_1 : P1, P3}`` on columns ``T``.

    With ``Ahat = A[:,T]``, ``Atil = A[S,T]``, ``E = sign(Ahat^+)`` and the
    row selector ``D`` (``D[k, S[k]] = 1``)::

        What = Atil^-T E (Ahat^+)^T            (placed at W[S,T])
        U    = Ahat What^T D - D^T What Ahat^T + D^T Atil^-T E - E^T Atil^-1 D

    which gives ``Ahat^T W A^T + Ahat^T U = E`` and ``<A,W> = ||Ahat^+||_1``.
    ``U`` is kept in factored form ``F G^T - G F^T`` (``F, G`` are m x 2r)
    so that tall inputs never materialize an m x m matrix.
    """
    A = linalg.as_matrix(A)
    m, n = A.shape
    S = index_set(S, m, "S")
    T = index_set(T, n, "T")
    r = len(T)
    Ahat = A[:, list(T)]
    Hhat = left_pseudoinverse(Ahat, tol)  # r x m; RankDeficientBlock if not full rank
    N = _block_inverse(A, S, T, tol)
    E = linalg.sign(Hhat)
    What = N.T @ E @ Hhat.T
    W = np.zeros((m, n))
    W[np.ix_(S, T)] = What
    D_T = np.zeros((m, r))  # D^T
    D_T[list(S), np.arange(r)] = 1.0
    # U = F G^T - G F^T with F = [Ahat What^T, D^T], G = [D^T, E^T N]
    F = np.hstack([Ahat @ What.T, D_T])
    G = np.hstack([D_T, E.T @ N])
    Z = A[list(S), :].T @ What @ Ahat.T + (A.T @ F) @ G.T - (A.T @ G) @ F.T
    return Certificate(
        W=W,
        dual_objective=float(np.sum(A[np.ix_(S, T)] * What)),
        feasibility_scale=linalg.max_norm(Z),
        primal_value=linalg.one_norm(Hhat),
        U_factors=(F, G),
        kind="ah",
    )


def ah_identity_residual(A, T: Sequence[int], cert: Certificate) -> float:
    """``||Ahat^T W A^T + Ahat^T U - sign(Ahat^+)||_max`` for an ah certificate."""
    A = linalg.as_matrix(A)
    Ahat = A[:, list(T)]
    E = linalg.sign(left_pseudoinverse(Ahat))
    F, G = cert.U_factors
    lhs = Ahat.T @ cert.W @ A.T + (Ahat.T @ F) @ G.T - (Ahat.T @ G) @ F.T
    return linalg.max_norm(lhs - E)


def certified_ratio(A, result: GinvResult, cert: Certificate) -> float:
    """A-posteriori bound on ``result.one_norm / opt`` from weak duality."""
    if cert.dual_objective <= 0.0:
        raise DegenerateCertificate("dual objective must be positive")
    return result.one_norm * cert.feasibility_scale / cert.dual_objective


def certificate_for(A, result: GinvResult, tol: ToleranceConfig = DEFAULT_TOL) -> Certificate:
    """The certificate matching ``result.kind``.

    ha results are certified through the ah certificate of ``A^T``.
    """
    if result.kind == "symmetric":
        return sym_certificate(A, result.S, tol)
    if result.kind == "ah":
        return ah_certificate(A, result.S, result.T, tol)
    if result.kind == "ha":
        cert = ah_certificate(np.asarray(A).T, result.T, result.S, tol)
        cert.kind = "ha"
        return cert
    return general_certificate(A, result.S, result.T, tol)
