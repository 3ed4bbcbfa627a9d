"""Closed-form test instances.

Each generator builds its matrices in exact rational arithmetic (sympy)
and converts to float64 only at the end, so that fixtures are checked
against formulas rather than against stored numbers.

Naming used below: ``Atil_n(a, b)`` is the n x n matrix with ``a`` on
the diagonal and ``b`` elsewhere; ``J`` is all-ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np
import sympy as sp

from . import linalg
from .errors import InvalidParams


@dataclass
class FamilyInstance:
    name: str
    A: np.ndarray
    known_H: np.ndarray | None = None
    known_W: np.ndarray | None = None
    known_V: np.ndarray | None = None
    known_values: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    exact_A: sp.Matrix | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {"name": self.name, "params": self.params, "known_values": self.known_values}
        for key in ("known_H", "known_W", "known_V"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val.tolist()
        return out


def _q(x) -> sp.Rational:
    """Exact rational from an int, Fraction, or float (via its decimal repr)."""
    if isinstance(x, sp.Basic):
        return sp.Rational(x)
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    if isinstance(x, float):
        return sp.Rational(repr(x))
    return sp.Rational(x)


def _f(M: sp.Matrix) -> np.ndarray:
    return np.array(M.evalf(20).tolist(), dtype=float).reshape(M.shape)


def _one_norm(M: sp.Matrix) -> sp.Rational:
    return sum((abs(x) for x in M), sp.Integer(0))


def atil(n: int, a, b) -> sp.Matrix:
    """``Atil_n(a, b) = (a - b) I + b J`` exactly."""
    a, b = _q(a), _q(b)
    return (a - b) * sp.eye(n) + b * sp.ones(n, n)


def atil_inverse_closed_form(n: int, a, b) -> sp.Matrix:
    """``Atil_n(a,b)^-1 = Atil_n((-a-(n-2)b)/den, b/den)`` with ``den = (b-a)(a+(n-1)b)``."""
    a, b = _q(a), _q(b)
    den = (b - a) * (a + (n - 1) * b)
    return atil(n, (-a - (n - 2) * b) / den, b / den)


# ---------------------------------------------------------------- worked examples


def sym_3x3() -> FamilyInstance:
    A = sp.Matrix([[5, 4, 2], [4, 5, -2], [2, -2, 8]])
    H = A / 81
    return FamilyInstance(
        name="sym_3x3",
        A=_f(A),
        known_H=_f(H),
        known_values={
            "opt_onenorm": float(_one_norm(H)),
            "block_norms": [2.0, 17 / 36, 17 / 36],
            "principal_dets": [9.0, 36.0, 36.0],
            "rank": 2,
        },
        exact_A=A,
    )


def ah_3x3() -> FamilyInstance:
    A = sp.Matrix([[1, 3, 8], [2, 2, 8], [3, 1, 8]])
    q = sp.Rational
    H = sp.Matrix([[q(-1, 4), 0, q(1, 4)], [q(1, 4), 0, q(-1, 4)], [q(1, 24), q(1, 24), q(1, 24)]])
    return FamilyInstance(
        name="ah_3x3",
        A=_f(A),
        known_H=_f(H),
        known_values={
            "opt_onenorm": float(_one_norm(H)),
            "block_norms": [31 / 24, 31 / 24, 7 / 6],
            "rank": 2,
        },
        exact_A=A,
    )


# ---------------------------------------------------------------- determinant worst cases


def toeplitz_inverse(r: int, delta_L, delta_U) -> sp.Matrix:
    """The r x r Toeplitz matrix ``N`` with ``N[i,j] = 1 + (j-i) dU`` above and ``1 + (i-j) dL`` below the diagonal."""
    dL, dU = _q(delta_L), _q(delta_U)
    return sp.Matrix(r, r, lambda i, j: 1 + (j - i) * dU if j >= i else 1 + (i - j) * dL)


def toeplitz_family(r: int, delta_L=1e-3, delta_U=1e-3, case: str = "general", pad: int = 1) -> FamilyInstance:
    """Rank-r instance on which ``Atil`` is a local maximizer of ``|det|``.

    ``Atil`` is the inverse of :func:`toeplitz_inverse`; with ``b = Atil 1``,
    ``c^T = 1^T Atil``, ``d = 1^T Atil 1`` the matrix is::

        general    [[Atil, b, 0], [c^T, d, 0], [0, 0, 0]]
        symmetric  [[Atil, b, 0], [b^T, d, 0], [0, 0, 0]]   (dL = dU)
        ah         [[Atil, b, 0], [0, 0, 0]]

    with ``pad`` zero rows/columns.  Swapping ``b`` (and ``c``) into the
    block leaves ``|det|`` unchanged but shrinks the inverse's 1-norm by
    a factor approaching r (ah) or r^2 (general, symmetric) as delta -> 0.
    """
    if r < 3:
        raise InvalidParams("toeplitz_family needs r >= 3")
    if case not in ("general", "symmetric", "ah"):
        raise InvalidParams(f"unknown case {case!r}")
    dL, dU = _q(delta_L), _q(delta_U)
    if dL < 0 or dU < 0 or (dL == 0 and dU == 0):
        raise InvalidParams("need delta_L, delta_U >= 0, not both zero")
    if case == "symmetric" and dL != dU:
        raise InvalidParams("symmetric case needs delta_L == delta_U")
    N = toeplitz_inverse(r, dL, dU)
    At = N.inv()
    one = sp.ones(r, 1)
    b = At * one
    c = one.T * At
    d = (one.T * At * one)[0, 0]
    if case == "ah":
        A = sp.zeros(r + pad, r + 1 + pad)
        A[:r, :r] = At
        A[:r, r] = b
    else:
        A = sp.zeros(r + 1 + pad, r + 1 + pad)
        A[:r, :r] = At
        A[:r, r] = b
        A[r, :r] = b.T if case == "symmetric" else c
        A[r, r] = d

    # post-swap inverses
    e1 = sp.zeros(r, 1)
    e1[0] = 1
    swap_b = N - (one - e1) * e1.T * N  # (Atil with column 1 replaced by b)^-1
    swap_cb = swap_b - swap_b * e1 * (one - e1).T  # and row 1 by [c^T, d]
    norm_N = _one_norm(N)
    kv = {
        "block_norm": float(norm_N),
        "block_norm_formula": float(r**2 + sp.Rational(r**3 - r, 6) * (dL + dU)),
        "swap_b_norm": float(_one_norm(swap_b)),
        "swap_cb_norm": float(_one_norm(swap_cb)),
        "det_block_inverse": float(N.det()),
        "det_block_inverse_formula": float((-(dL + dU)) ** (r - 1) - (r - 1) * dL * dU * (-(dL + dU)) ** (r - 2)),
    }
    if dU == 0:
        kv["swap_b_norm_formula"] = float(r + sp.Rational(r**3 - r, 6) * dL)
        kv["swap_cb_norm_formula"] = float(1 + sp.Rational(r**3 - r, 3) * dL)
    if dL == dU:
        kv["swap_cb_norm_formula"] = float(1 + sp.Rational(r**3 - r, 3) * (dL + dU))
    if case == "ah":
        kv["limit_ratio"] = r
        kv["ratio"] = kv["block_norm"] / kv["swap_b_norm"]
        kv["escape_T"] = [r] + list(range(1, r))
    else:
        kv["limit_ratio"] = r * r
        kv["ratio"] = kv["block_norm"] / kv["swap_cb_norm"]
        kv["escape_S"] = [r] + list(range(1, r))
        kv["escape_T"] = [r] + list(range(1, r))
    return FamilyInstance(
        name=f"toeplitz_{case}",
        A=_f(A),
        known_values=kv,
        params={"r": r, "delta_L": float(dL), "delta_U": float(dU), "case": case, "pad": pad},
        exact_A=A,
    )


# ---------------------------------------------------------------- 1-norm local search


def no_const_rank2(k=10) -> FamilyInstance:
    """``[[1,0,k,k],[0,1,k,-k]]``: columns {0,1} are a 1-norm local minimum (value 2)
    but columns {2,3} have inverse 1-norm ``2/k``."""
    kq = _q(k)
    if kq <= 0:
        raise InvalidParams("k must be positive")
    A = sp.Matrix([[1, 0, kq, kq], [0, 1, kq, -kq]])
    return FamilyInstance(
        name="no_const_rank2",
        A=_f(A),
        known_values={
            "local_min_norm": 2.0,
            "neighbor_norm": float(2 + 1 / kq),
            "escape_norm": float(2 / kq),
            "local_T": [0, 1],
            "escape_T": [2, 3],
        },
        params={"k": float(kq)},
        exact_A=A,
    )


def no_const_general(r: int = 3, k=10) -> FamilyInstance:
    """``[I_r | k Atil_r(-1, 1)]``: ``I_r`` is a 1-norm local minimum (value r),
    every neighbor has ``2(r-1) + 1/k``, and the right block has ``r/k``."""
    if r < 3:
        raise InvalidParams("no_const_general needs r >= 3")
    kq = _q(k)
    if kq <= 0:
        raise InvalidParams("k must be positive")
    At = atil(r, -1, 1)
    A = sp.eye(r).row_join(kq * At)
    return FamilyInstance(
        name="no_const_general",
        A=_f(A),
        known_values={
            "local_min_norm": float(r),
            "neighbor_norm": float(2 * (r - 1) + 1 / kq),
            "escape_norm": float(sp.Rational(r) / kq),
            "det_atil": float(At.det()),
            "det_atil_formula": float((-2) ** (r - 1) * (r - 2)),
            "local_T": list(range(r)),
            "escape_T": list(range(r, 2 * r)),
        },
        params={"r": r, "k": float(kq)},
        exact_A=A,
    )


def tight_ratio_r_plus_1(r: int = 3) -> FamilyInstance:
    """``[Ahat, Ahat 1]`` with ``Ahat = (J + rI)^-1``: the best 1-norm block is
    ``2r/(r+1)`` times the LP optimum."""
    if r < 2:
        raise InvalidParams("tight_ratio_r_plus_1 needs r >= 2")
    Ahat = atil_inverse_closed_form(r, r + 1, 1)
    A = Ahat.row_join(Ahat * sp.ones(r, 1))
    return FamilyInstance(
        name="tight_ratio_r_plus_1",
        A=_f(A),
        known_values={
            "expected_ratio": float(sp.Rational(2 * r, r + 1)),
            "block_norm": float(2 * r * r),
            "opt_onenorm": float(r * (r + 1)),
            "start_T": list(range(r)),
        },
        params={"r": r},
        exact_A=A,
    )


# ---------------------------------------------------------------- LP sharpness


def p1sym_sharp(r: int = 3) -> FamilyInstance:
    """(r+2) x (r+2) symmetric rank-r matrix whose symmetric P1 LP has a unique
    optimal vertex with r^2 + r nonzeros (and value r^2 + r)."""
    if r < 3:
        raise InvalidParams("p1sym_sharp needs r >= 3")
    q = sp.Rational
    X = sp.zeros(r, 2)
    X[0, 0] = q(r, 2 * (r - 1))
    X[0, 1] = -q(r * (r - 2), 2 * (r - 1) ** 2)
    for i in range(1, r):
        X[i, 0] = q(1, 2 * (r - 1))
        X[i, 1] = q(r, 2 * (r - 1) ** 2)
    Y = sp.zeros(r, 2)
    Y[0, 1] = -1
    for i in range(1, r):
        Y[i, 0] = -1
    H0 = sp.eye(r) - sp.ones(r, r)
    D = sp.zeros(r, r)
    D[0, 0] = q(r - 1, r)
    A0inv = H0 + X * Y.T + Y * X.T
    A0 = A0inv.inv()
    L = sp.eye(r).col_join(X.T)  # (r+2) x r
    A = L * A0 * L.T
    H = sp.zeros(r + 2, r + 2)
    H[:r, :r] = H0
    H[:r, r:] = Y
    H[r:, :r] = Y.T
    W = sp.zeros(r + 2, r + 2)
    W[:r, :r] = A0inv * (H0 + D) * A0inv
    return FamilyInstance(
        name="p1sym_sharp",
        A=_f(A),
        known_H=_f(H),
        known_W=_f(W),
        known_values={
            "opt_onenorm": float(_one_norm(H)),
            "nnz_expected": r * r + r,
            "dual_objective": float(sum((a * w for a, w in zip(A, W)), sp.Integer(0))),
            "XtY": _f(X.T * Y).tolist(),
            "XtH0D_minus_Yt": float(max(abs(v) for v in (X.T * (H0 + D) - Y.T))),
        },
        params={"r": r},
        exact_A=A,
    )


def _p123_Y(m: int, r: int) -> sp.Matrix:
    big, small = sp.Rational(m + r, 2 * m), sp.Rational(m - r + 1, 2 * m)
    pairs = list(permutations(range(r), 2))  # lexicographic (i, j), i != j
    Y = sp.zeros(r, len(pairs))
    for col, (i, j) in enumerate(pairs):
        Y[i, col] = big
        Y[j, col] = small
    return Y


def p123_sharp(m: int = 3, r: int = 2) -> FamilyInstance:
    """m x r^2 rank-r matrix whose P1+P2+P3 LP has a unique optimal vertex
    with ``r^2 + r^2 (m - r)`` nonzeros.

    Also returns the dual pair ``(W, V)`` with
    ``A^T W A^T + V (I - AA^+) = sign(H) + D``, ``||D||_max < 1``.
    """
    if r < 2 or m <= r:
        raise InvalidParams("p123_sharp needs r >= 2 and m > r")
    big = sp.Rational(m + r, 2 * m)
    small = sp.Rational(m - r + 1, 2 * m)
    X = sp.ones(r, m - r)
    Y = _p123_Y(m, r)
    nY = Y.shape[1]
    H0 = sp.eye(r)
    H1 = sp.Matrix(nY, r, lambda i, j: 1 if Y[j, i] == big else 0)
    IXX = sp.eye(r) + X * X.T
    A0 = ((H0 + Y * H1) * IXX).inv()
    L = sp.eye(r).col_join(X.T)  # m x r
    A = L * A0 * sp.eye(r).row_join(Y)  # m x r^2
    Hstack = H0.col_join(H1)
    H = Hstack * sp.eye(r).row_join(X)  # r^2 x m
    sgn = lambda M: M.applyfunc(sp.sign)  # noqa: E731
    W0 = (sgn(H0) + sgn(H0 * X) * X.T) * IXX.inv()
    A0invT = A0.inv().T
    W = sp.zeros(m, r * r)
    W[:r, :r] = A0invT * W0 * A0invT
    D1 = sp.Matrix(nY, r, lambda i, j: 0 if Y[j, i] == big else (sp.Rational(2 * m - 2 * r + 1, 2 * m) if Y[j, i] == small else sp.Rational(m - r, 2 * m)))
    D = sp.zeros(r * r, m)
    D[r:, :r] = D1
    V = sgn(H) + D
    return FamilyInstance(
        name="p123_sharp",
        A=_f(A),
        known_H=_f(H),
        known_W=_f(W),
        known_V=_f(V),
        known_values={
            "opt_onenorm": float(_one_norm(H)),
            "nnz_expected": r * r + r * r * (m - r),
            "D_max": float(max(abs(v) for v in D)) if D else 0.0,
            "dual_objective": float(sum((a * w for a, w in zip(A, W)), sp.Integer(0))),
        },
        params={"m": m, "r": r, "n": r * r},
        exact_A=A,
    )


# ---------------------------------------------------------------- embedding


def sym_embedding(A) -> np.ndarray:
    """``[[0, A], [A^T, 0]]``; for a symmetric generalized inverse
    ``[[X, Z^T], [Z, Y]]`` of it, ``Z`` is a generalized inverse of ``A``."""
    A = linalg.as_matrix(A)
    m, n = A.shape
    out = np.zeros((m + n, m + n))
    out[:m, m:] = A
    out[m:, :m] = A.T
    return out


FAMILIES = {
    "sym_3x3": sym_3x3,
    "ah_3x3": ah_3x3,
    "toeplitz": toeplitz_family,
    "no_const_rank2": no_const_rank2,
    "no_const_general": no_const_general,
    "tight_ratio_r_plus_1": tight_ratio_r_plus_1,
    "p1sym_sharp": p1sym_sharp,
    "p123_sharp": p123_sharp,
}


def get_family(name: str, **params) -> FamilyInstance:
    try:
        fn = FAMILIES[name]
    except KeyError:
        raise InvalidParams(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    return fn(**params)
