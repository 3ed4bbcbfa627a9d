"""1-norm minimizing generalized inverses as linear programs.

Four models, all ``min ||H||_1`` over an equality system that is linear
in ``H`` (with ``H`` written as ``H+ - H-``, both nonnegative):

``P1``      AHA = A
``P1_SYM``  AHA = A with H symmetric (variables: lower triangle of H)
``P13``     AH = AA^+                      (= P1 + P3)
``P123``    AH = AA^+, H (A Hhat) = H      (= P1 + P2 + P3)

``vec`` below is row-major (``H.ravel()``), for which
``vec(X H Y) = kron(X, Y.T) @ vec(H)``.

:func:`simplex_solve` returns a basic (vertex) optimum, which is what the
nonzero bounds on extreme solutions are about; an interior-point answer
would not do.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import linalg
from .blocks import GinvResult
from .errors import (
    Infeasible,
    InvalidLinearizer,
    InvalidParams,
    IterationLimit,
    NotSkew,
    NotSymmetric,
    NumericalBreakdown,
    ShapeMismatch,
    ZeroMatrix,
)
from .linalg import DEFAULT_TOL, ToleranceConfig

MODEL_KINDS = ("P1", "P1_SYM", "P13", "P123")

# relative cutoff on |R_kk| when dropping dependent equality rows
ROW_RANK_TOL = 1e-9


@dataclass
class LpModel:
    kind: str
    objective: np.ndarray  # length 2N, split variables (x+, x-)
    eq_matrix: np.ndarray  # p x 2N
    eq_rhs: np.ndarray  # p
    m: int
    n: int
    r: int
    lift: np.ndarray | None = None  # (n*m) x N map from free variables to vec(H); None = identity
    rows_total: int = 0  # equality rows before redundancy removal

    @property
    def num_free(self) -> int:
        return self.objective.size // 2

    @property
    def num_rows(self) -> int:
        return self.eq_rhs.size

    def to_H(self, x_split: np.ndarray) -> np.ndarray:
        N = self.num_free
        v = x_split[:N] - x_split[N:]
        if self.lift is not None:
            v = self.lift @ v
        return v.reshape(self.n, self.m)

    def vertex_bound(self) -> int:
        """Largest nonzero count of ``H`` at any extreme solution of this model."""
        m, n, r = self.m, self.n, self.r
        return {
            "P1": r * r,
            "P1_SYM": r * r + r,
            "P13": m * r,
            "P123": m * r + (m - r) * (n - r),
        }[self.kind]


@dataclass
class LpSolution:
    H: np.ndarray
    objective_value: float
    basis: list
    is_vertex: bool
    iterations: int
    x: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------- builders


def _independent_rows(M: np.ndarray, rhs: np.ndarray):
    if M.shape[0] == 0:
        return M, rhs
    R, piv = sla.qr(M.T, mode="r", pivoting=True, check_finite=False)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return M[:0], rhs[:0]
    k = int(np.count_nonzero(d > ROW_RANK_TOL * d[0]))
    keep = np.sort(piv[:k])
    return M[keep], rhs[keep]


def _assemble(kind, M, rhs, weights, m, n, r, lift=None) -> LpModel:
    rows_total = M.shape[0]
    M, rhs = _independent_rows(M, rhs)
    return LpModel(
        kind=kind,
        objective=np.concatenate([weights, weights]),
        eq_matrix=np.hstack([M, -M]),
        eq_rhs=rhs.copy(),
        m=m,
        n=n,
        r=r,
        lift=lift,
        rows_total=rows_total,
    )


def _nonzero(A: np.ndarray, tol: ToleranceConfig) -> int:
    r = linalg.numerical_rank(A, tol)
    if r == 0:
        raise ZeroMatrix("A has rank 0")
    return r


def build_p1(A, tol: ToleranceConfig = DEFAULT_TOL) -> LpModel:
    A = linalg.as_matrix(A)
    m, n = A.shape
    r = _nonzero(A, tol)
    M = np.kron(A, A.T)
    return _assemble("P1", M, A.ravel(), np.ones(n * m), m, n, r)


def _sym_lift(n: int):
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    L = np.zeros((n * n, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        L[i * n + j, k] = 1.0
        L[j * n + i, k] = 1.0
    return pairs, L


def build_p1_sym(A, tol: ToleranceConfig = DEFAULT_TOL) -> LpModel:
    """P1 restricted to symmetric ``H``, parametrized by its lower triangle.

    Off-diagonal variables stand for two entries of ``H`` and so carry
    weight 2 in the objective; only the lower-triangle equations of
    ``AHA = A`` are kept (the rest are their mirror images).
    """
    A = linalg.as_matrix(A)
    if not linalg.is_symmetric(A, tol):
        raise NotSymmetric("build_p1_sym needs a symmetric A")
    n = A.shape[0]
    r = _nonzero(A, tol)
    pairs, L = _sym_lift(n)
    low = np.array([i * n + j for i, j in pairs])
    M = (np.kron(A, A.T) @ L)[low]
    weights = np.array([1.0 if i == j else 2.0 for i, j in pairs])
    return _assemble("P1_SYM", M, A.ravel()[low], weights, n, n, r, lift=L)


def build_p13(A, tol: ToleranceConfig = DEFAULT_TOL) -> LpModel:
    A = linalg.as_matrix(A)
    m, n = A.shape
    r = _nonzero(A, tol)
    P = A @ linalg.pseudoinverse(A, tol)
    M = np.kron(A, np.eye(m))
    return _assemble("P13", M, P.ravel(), np.ones(n * m), m, n, r)


def build_p123(A, Hhat, tol: ToleranceConfig = DEFAULT_TOL) -> LpModel:
    """P1+P2+P3 linearized through an ah-symmetric reflexive ``Hhat``.

    With ``AH = AA^+`` fixed, ``HAH = H`` is the linear condition
    ``H (A Hhat) = H``, since ``A Hhat = AA^+`` for any such ``Hhat``.
    """
    A = linalg.as_matrix(A)
    m, n = A.shape
    r = _nonzero(A, tol)
    Hh = Hhat.H if isinstance(Hhat, GinvResult) else linalg.as_matrix(Hhat, "Hhat")
    if Hh.shape != (n, m):
        raise ShapeMismatch(f"Hhat must be {(n, m)}, got {Hh.shape}")
    scale = tol.residual_tol * (1.0 + linalg.max_norm(A)) * (1.0 + linalg.max_norm(Hh)) ** 2
    AH = A @ Hh
    if (
        linalg.max_norm(AH @ A - A) > scale
        or linalg.max_norm(Hh @ AH - Hh) > scale
        or linalg.max_norm(AH - AH.T) > scale
    ):
        raise InvalidLinearizer("Hhat must satisfy P1, P2 and P3")
    P = A @ linalg.pseudoinverse(A, tol)
    top = np.kron(A, np.eye(m))
    bottom = np.kron(np.eye(n), (AH - np.eye(m)).T)
    M = np.vstack([top, bottom])
    rhs = np.concatenate([P.ravel(), np.zeros(n * m)])
    return _assemble("P123", M, rhs, np.ones(n * m), m, n, r)


# ---------------------------------------------------------------- simplex

REFACTOR_EVERY = 100
_dger = sla.blas.get_blas_funcs("ger", dtype=np.float64)
STALL_LIMIT = 50


class _Simplex:
    """Dense revised simplex keeping an explicit basis inverse.

    Pricing is Dantzig (most negative reduced cost).  After
    ``STALL_LIMIT`` consecutive degenerate pivots it switches to Bland's
    rule (lowest-index entering variable, lowest-index leaving variable
    among ratio ties), which cannot cycle, and switches back after the
    next nondegenerate pivot.
    """

    def __init__(self, E, b, c, basis, enterable, max_iter, pivot_tol, opt_tol):
        self.E, self.b, self.c = E, b, c
        self.basis = np.array(basis, dtype=int)
        self.enterable = enterable
        self.max_iter = max_iter
        self.pivot_tol = pivot_tol
        self.opt_tol = opt_tol * max(1.0, np.abs(c).max())
        self.iterations = 0
        self.refactor()

    def refactor(self):
        B = self.E[:, self.basis]
        try:
            self.Binv = np.asfortranarray(np.linalg.inv(B))
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("basis matrix became singular") from exc
        self.xB = self.Binv @ self.b

    def run(self):
        stall, bland = 0, False
        since = 0
        while True:
            if since >= REFACTOR_EVERY:
                self.refactor()
                since = 0
            y = self.c[self.basis] @ self.Binv
            d = self.c - y @ self.E
            d[self.basis] = 0.0
            d[~self.enterable] = 0.0
            cand = np.flatnonzero(d < -self.opt_tol)
            if cand.size == 0:
                return
            if self.iterations >= self.max_iter:
                raise IterationLimit(f"simplex exceeded {self.max_iter} iterations")
            j = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            u = self.Binv @ self.E[:, j]
            pos = np.flatnonzero(u > self.pivot_tol)
            if pos.size == 0:
                raise NumericalBreakdown("no admissible pivot (unbounded direction on a bounded LP)")
            xb = np.maximum(self.xB[pos], 0.0)
            ratios = xb / u[pos]
            theta = ratios.min()
            ties = pos[ratios <= theta + 1e-12 * (1.0 + theta)]
            if bland:
                leave = int(ties[np.argmin(self.basis[ties])])
            else:
                leave = int(ties[np.argmax(u[ties])])
            self._pivot(leave, j, u, theta)
            self.iterations += 1
            since += 1
            if theta <= 1e-12:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True
            else:
                stall, bland = 0, False

    def _pivot(self, l, j, u, theta):
        row = self.Binv[l] / u[l]
        # in-place rank-one update (Binv is Fortran-ordered)
        self.Binv = _dger(-1.0, u, row, a=self.Binv, overwrite_a=True)
        self.Binv[l] = row
        self.xB -= theta * u
        self.xB[l] = theta
        self.basis[l] = j


def simplex_solve(
    model: LpModel,
    max_iter: int | None = None,
    pivot_tol: float = 1e-11,
    opt_tol: float = 1e-9,
) -> LpSolution:
    """Two-phase revised simplex; returns an optimal basic feasible solution.

    Raises
    ------
    Infeasible
        phase 1 ends with positive artificial mass.
    IterationLimit
        more than ``max_iter`` pivots in a phase.
    NumericalBreakdown
        no pivot above ``pivot_tol`` is available, or the basis goes singular.
    """
    E = model.eq_matrix.copy()
    b = model.eq_rhs.copy()
    c = model.objective.astype(float)
    p, N = E.shape
    if max_iter is None:
        max_iter = 50 * (p + N)
    flip = b < 0
    E[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1 on [E | I] starting from the artificial basis
    Eaug = np.hstack([E, np.eye(p)])
    c1 = np.concatenate([np.zeros(N), np.ones(p)])
    enter1 = np.concatenate([np.ones(N, bool), np.zeros(p, bool)])
    ph1 = _Simplex(Eaug, b, c1, np.arange(N, N + p), enter1, max_iter, pivot_tol, opt_tol)
    ph1.run()
    ph1.refactor()
    infeas = float(np.abs(ph1.xB[ph1.basis >= N]).sum())
    if infeas > 1e-7 * (1.0 + np.abs(b).sum()):
        raise Infeasible(f"phase 1 ended with infeasibility {infeas:.3g}")

    basis = ph1.basis.copy()
    keep_rows = np.ones(p, bool)
    for l in np.flatnonzero(basis >= N):
        row = ph1.Binv[l] @ E
        row[basis[basis < N]] = 0.0
        k = int(np.argmax(np.abs(row)))
        if abs(row[k]) > 1e-9 * max(1.0, np.abs(row).max()):
            u = ph1.Binv @ Eaug[:, k]
            ph1._pivot(l, k, u, 0.0)
            basis = ph1.basis.copy()
        else:
            # dependent row: drop one original equation it combines
            keep_rows[int(np.argmax(np.abs(ph1.Binv[l]) * keep_rows))] = False
    if not keep_rows.all():
        basis = basis[basis < N]
        E, b = E[keep_rows], b[keep_rows]

    ph2 = _Simplex(E, b, c, basis, np.ones(N, bool), max_iter, pivot_tol, opt_tol)
    ph2.run()
    ph2.refactor()
    x = np.zeros(N)
    x[ph2.basis] = np.maximum(ph2.xB, 0.0)
    return LpSolution(
        H=model.to_H(x),
        objective_value=float(c @ x),
        basis=sorted(int(i) for i in ph2.basis),
        is_vertex=True,
        iterations=ph1.iterations + ph2.iterations,
        x=x,
    )


def solve_model(A, kind: str, tol: ToleranceConfig = DEFAULT_TOL, Hhat=None) -> LpSolution:
    """Build and solve one of :data:`MODEL_KINDS` for ``A``."""
    kind = kind.upper()
    if kind == "P1":
        model = build_p1(A, tol)
    elif kind in ("P1_SYM", "P1SYM"):
        model = build_p1_sym(A, tol)
    elif kind == "P13":
        model = build_p13(A, tol)
    elif kind == "P123":
        if Hhat is None:
            from .search import ah_symmetric_ginv

            Hhat = ah_symmetric_ginv(A)
        model = build_p123(A, Hhat, tol)
    else:
        raise InvalidParams(f"unknown model {kind!r}; choose from {MODEL_KINDS}")
    return simplex_solve(model)


# ---------------------------------------------------------------- duals


def dual_feasibility(A, W, U=None, V=None, tol: ToleranceConfig = DEFAULT_TOL):
    """Dual objective and feasibility scale of a candidate dual point.

    Returns ``(<A,W>, s)`` with ``s = ||A^T W A^T + A^T U + V (I - AA^+)||_max``
    (terms for absent ``U``/``V`` dropped).  ``(W, U, V) / s`` is dual
    feasible, so ``<A,W> / s`` bounds the matching primal optimum from
    below.  ``U`` must be skew-symmetric.
    """
    A = linalg.as_matrix(A)
    W = linalg.as_matrix(W, "W")
    m, n = A.shape
    if W.shape != (m, n):
        raise ShapeMismatch(f"W must be {(m, n)}, got {W.shape}")
    Z = A.T @ W @ A.T
    if U is not None:
        U = linalg.as_matrix(U, "U")
        if U.shape != (m, m):
            raise ShapeMismatch(f"U must be {(m, m)}, got {U.shape}")
        if linalg.max_norm(U + U.T) > tol.residual_tol * (1.0 + linalg.max_norm(U)):
            raise NotSkew("U must be skew-symmetric")
        Z = Z + A.T @ U
    if V is not None:
        V = linalg.as_matrix(V, "V")
        if V.shape != (n, m):
            raise ShapeMismatch(f"V must be {(n, m)}, got {V.shape}")
        Z = Z + V @ (np.eye(m) - A @ linalg.pseudoinverse(A, tol))
    return float(np.sum(A * W)), linalg.max_norm(Z)


# ---------------------------------------------------------------- export


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_lp(model: LpModel, out=None) -> str:
    """Render ``model`` in CPLEX LP text format; write to ``out`` if given.

    Variables are ``xp<k>``/``xm<k>`` for the positive/negative parts of
    free variable ``k``; numbers use 17 significant digits.
    """
    N = model.num_free
    names = [f"xp{k}" for k in range(N)] + [f"xm{k}" for k in range(N)]
    buf = io.StringIO()
    buf.write(f"\\ {model.kind} model: m={model.m} n={model.n} r={model.r}\n")
    buf.write("Minimize\n obj:")
    for name, w in zip(names, model.objective):
        if w != 0:
            buf.write(f" + {_fmt(w)} {name}")
    buf.write("\nSubject To\n")
    for i, (row, rhs) in enumerate(zip(model.eq_matrix, model.eq_rhs)):
        terms = [f"{'-' if a < 0 else '+'} {_fmt(abs(a))} {names[k]}" for k, a in enumerate(row) if a != 0]
        buf.write(f" c{i}: {' '.join(terms) if terms else '0 xp0'} = {_fmt(rhs)}\n")
    buf.write("Bounds\n")
    for name in names:
        buf.write(f" {name} >= 0\n")
    buf.write("End\n")
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w") as fh:
                fh.write(text)
    return text
