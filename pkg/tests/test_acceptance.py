"""Acceptance criteria, each checked at its stated tolerance.

Tests are tagged with ``criterion(number, title)``; the conftest prints
one PASS/FAIL line per criterion at the end of the run.
"""

import time
from itertools import combinations

import numpy as np
import pytest
import sympy as sp

from sparseginv import blocks, families, harness, linalg, lp, search, verify
from sparseginv.harness import GenSpec, gen_instance


def criterion(num, title):
    return pytest.mark.criterion(num, title)


C1 = criterion(1, "worked symmetric 3x3 example")
C2 = criterion(2, "worked ah-symmetric 3x3 example")
C3 = criterion(3, "approximation guarantees on random instances")
C4 = criterion(4, "determinant worst-case families")
C5 = criterion(5, "1-norm local search bounds")
C6 = criterion(6, "extreme-point sparsity of LP vertices")
C7 = criterion(7, "LP sharpness fixtures")
C8 = criterion(8, "ah certificate identities")
C9 = criterion(9, "desk-scale LP vs local search directionality")
C10 = criterion(10, "scalability smoke (5000 x 500, rank 50)")


# ---------------------------------------------------------------- 1


@C1
def test_criterion_1_symmetric_example():
    t0 = time.perf_counter()
    A_exact = sp.Matrix([[5, 4, 2], [4, 5, -2], [2, -2, 8]])
    assert A_exact * A_exact == 9 * A_exact
    A = np.array(A_exact.tolist(), dtype=float)
    H = A / 81
    assert linalg.max_norm(A @ H @ A - A) <= 1e-12
    assert linalg.max_norm(H @ A @ H - H) <= 1e-12
    assert linalg.max_norm(H - H.T) <= 1e-12
    assert abs(linalg.one_norm(H) - 34 / 81) <= 1e-12
    norms = sorted(blocks.symmetric_block(A, S).one_norm for S in combinations(range(3), 2))
    assert np.all(np.abs(np.array(norms) - np.array(sorted([2, 17 / 36, 17 / 36]))) <= 1e-12)
    assert time.perf_counter() - t0 < 1.0


# ---------------------------------------------------------------- 2

AH3 = np.array([[1.0, 3, 8], [2, 2, 8], [3, 1, 8]])
AH3_H = np.array([[-1 / 4, 0, 1 / 4], [1 / 4, 0, -1 / 4], [1 / 24, 1 / 24, 1 / 24]])


@C2
def test_criterion_2_exhibited_inverse_and_blocks():
    rep = verify.check_properties(AH3, AH3_H)
    assert rep.holds("p1") and rep.holds("p2") and rep.holds("p3") and rep.reflexive
    assert abs(linalg.one_norm(AH3_H) - 9 / 8) <= 1e-12
    norms = sorted(blocks.column_block(AH3, T).one_norm for T in combinations(range(3), 2))
    assert np.all(np.abs(np.array(norms) - np.array(sorted([31 / 24, 31 / 24, 7 / 6]))) <= 1e-12)


@C2
def test_criterion_2_lp_p123_value():
    # the 9/8 inverse is optimal once P2 is imposed as well
    sol = lp.solve_model(AH3, "P123")
    assert abs(sol.objective_value - 9 / 8) <= 1e-8


@C2
def test_criterion_2_lp_p13_value():
    # required: LP P13 optimum equals 9/8
    sol = lp.solve_model(AH3, "P13")
    assert abs(sol.objective_value - 9 / 8) <= 1e-8, (
        f"P13 optimum is {sol.objective_value!r}; H={sol.H.tolist()}"
    )


# ---------------------------------------------------------------- 3


def _random_specs(rng, count, symmetric):
    out = []
    for i in range(count):
        if symmetric:
            n = int(rng.integers(2, 13))
            m = n
        else:
            m, n = int(rng.integers(2, 13)), int(rng.integers(2, 17))
        r = int(rng.integers(1, min(4, m, n) + 1))
        out.append(GenSpec(m, n, r, seed=1000 + i, symmetric=symmetric))
    return out


@C3
def test_criterion_3_approximation_guarantees():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    checked = 0
    for spec in _random_specs(rng, 50, symmetric=True):
        A = gen_instance(spec)
        res = search.sym_reflexive_ginv(A)
        opt = lp.solve_model(A, "P1_SYM").objective_value
        cert = verify.certificate_for(A, res)
        r2 = spec.r**2
        assert res.one_norm <= r2 * opt + 1e-6
        assert verify.certified_ratio(A, res, cert) <= r2 + 1e-6
        assert cert.implied_lower_bound <= opt + 1e-8
        checked += 1
    for spec in _random_specs(rng, 50, symmetric=False):
        A = gen_instance(spec)
        res = search.ah_symmetric_ginv(A)
        opt = lp.solve_model(A, "P13").objective_value
        cert = verify.certificate_for(A, res)
        assert res.one_norm <= spec.r * opt + 1e-6
        assert verify.certified_ratio(A, res, cert) <= spec.r + 1e-6
        assert cert.implied_lower_bound <= opt + 1e-8
        checked += 1
    assert checked == 100
    assert time.perf_counter() - t0 < 60.0


# ---------------------------------------------------------------- 4


def _toeplitz_pair(f, r):
    """Local-search result from the Atil start and the competing block."""
    A, kv, case = f.A, f.known_values, f.params["case"]
    if case == "ah":
        out = search.local_search_columns(A, range(r), range(r))
        return out, blocks.column_block(A, out.T).one_norm, blocks.column_block(A, kv["escape_T"]).one_norm
    if case == "general":
        out = search.local_search_general(A, range(r), range(r))
        return (out, blocks.general_block(A, out.S, out.T).one_norm,
                blocks.general_block(A, kv["escape_S"], kv["escape_T"]).one_norm)
    out = search.local_search_principal(A, range(r))
    return out, blocks.symmetric_block(A, out.S).one_norm, blocks.symmetric_block(A, kv["escape_S"]).one_norm


@C4
@pytest.mark.parametrize("r", [3, 4, 5])
def test_criterion_4_closed_forms(r):
    d = 1e-3
    for case, dL, dU in (("ah", d, 0.0), ("general", d, 0.0), ("symmetric", d, d)):
        f = families.toeplitz_family(r, dL, dU, case)
        A = f.A
        block_norm = linalg.one_norm(linalg.inverse(A[:r, :r]))
        assert block_norm == pytest.approx(r * r + (r**3 - r) / 6 * (dL + dU), rel=1e-8)
        out, h, alt = _toeplitz_pair(f, r)
        assert out.trace == []  # Atil is a local maximizer
        assert h == pytest.approx(block_norm, rel=1e-8)
        if case == "ah":
            assert alt == pytest.approx(r + (r**3 - r) / 6 * dL, rel=1e-8)
        elif case == "general":
            assert alt == pytest.approx(1 + (r**3 - r) / 3 * dL, rel=1e-8)
        else:
            assert alt == pytest.approx(1 + (r**3 - r) / 3 * (dL + dU), rel=1e-8)


@C4
@pytest.mark.parametrize("r", [3, 4, 5])
def test_criterion_4_limit_ratios(r):
    d = 1e-4
    for case, dL, dU, limit in (("ah", d, 0.0, r), ("general", d, 0.0, r * r), ("symmetric", d, d, r * r)):
        f = families.toeplitz_family(r, dL, dU, case)
        out, h, alt = _toeplitz_pair(f, r)
        assert out.trace == []
        assert abs(h / alt - limit) <= 0.02 * limit


# ---------------------------------------------------------------- 5


@C5
@pytest.mark.parametrize("r", [2, 3, 4])
def test_criterion_5_tight_ratio(r):
    f = families.tight_ratio_r_plus_1(r)
    out = search.local_search_onenorm(f.A, range(r), range(r))
    achieved = blocks.general_block(f.A, out.S, out.T).one_norm
    opt = lp.solve_model(f.A, "P1").objective_value
    assert abs(achieved / opt - 2 * r / (r + 1)) <= 1e-4


@C5
@pytest.mark.parametrize("k", [10, 100])
def test_criterion_5_no_constant_ratio(k):
    f = families.no_const_rank2(k)
    out = search.local_search_onenorm(f.A, (0, 1), (0, 1))
    assert out.iterations == 0 and out.T == (0, 1)
    local = blocks.general_block(f.A, out.S, out.T).one_norm
    escape = blocks.general_block(f.A, (0, 1), (2, 3)).one_norm
    assert abs(local / escape - k) <= 1e-6


# ---------------------------------------------------------------- 6


@C6
@pytest.mark.parametrize("kind", ["P1", "P1_SYM", "P13", "P123"])
def test_criterion_6_vertex_sparsity(kind):
    rng = np.random.default_rng(6)
    for i in range(30):
        m = int(rng.integers(2, 11))
        n = m if kind == "P1_SYM" else int(rng.integers(2, 9))
        if kind == "P1_SYM":
            m = n = int(rng.integers(2, 9))
        r = int(rng.integers(1, min(3, m, n) + 1))
        A = gen_instance(GenSpec(m, n, r, seed=600 + i, symmetric=kind == "P1_SYM"))
        if kind == "P1":
            model = lp.build_p1(A)
        elif kind == "P1_SYM":
            model = lp.build_p1_sym(A)
        elif kind == "P13":
            model = lp.build_p13(A)
        else:
            model = lp.build_p123(A, search.ah_symmetric_ginv(A))
        sol = lp.simplex_solve(model)
        bound = {"P1": r * r, "P1_SYM": r * r + r, "P13": m * r, "P123": m * r + (m - r) * (n - r)}[kind]
        assert linalg.nnz(sol.H, 1e-6) <= bound
        assert linalg.max_norm(A @ sol.H @ A - A) <= 1e-8 * (1 + linalg.max_norm(A))


# ---------------------------------------------------------------- 7


def _support_columns_independent(model, H, tol=1e-6):
    """Full column rank of the equality system restricted to supp(H)."""
    hit = np.abs(H.ravel()) > tol
    L = model.lift if model.lift is not None else np.eye(hit.size)
    cols = np.flatnonzero((np.abs(L[hit]) > 0).any(axis=0))
    M = model.eq_matrix[:, : model.num_free][:, cols]
    return np.linalg.matrix_rank(M) == cols.size


@C7
def test_criterion_7_p1sym_sharp():
    f = families.p1sym_sharp(3)
    A, W = f.A, f.known_W
    model = lp.build_p1_sym(A)
    sol = lp.simplex_solve(model)
    assert abs(sol.objective_value - 12) <= 1e-7
    assert linalg.nnz(sol.H, 1e-6) == 12
    # dual feasibility and zero gap
    obj, scale = lp.dual_feasibility(A, W)
    assert scale <= 1 + 1e-8 and abs(obj - 12) <= 1e-8
    # uniqueness: strict complementarity plus independent support columns
    Z = A @ W @ A
    off = np.abs(sol.H) <= 1e-6
    assert np.abs(Z[off]).max() < 1 - 1e-8
    assert _support_columns_independent(model, sol.H)
    assert np.allclose(sol.H, f.known_H, atol=1e-7)


@C7
def test_criterion_7_p123_sharp():
    f = families.p123_sharp(3, 2)
    A, H, W, V = f.A, f.known_H, f.known_W, f.known_V
    model = lp.build_p123(A, search.ah_symmetric_ginv(A))
    sol = lp.simplex_solve(model)
    assert linalg.nnz(sol.H, 1e-6) == 8
    assert np.array_equal(np.abs(sol.H) > 1e-6, np.abs(H) > 1e-6)
    P = A @ linalg.pseudoinverse(A)
    D = A.T @ W @ A.T + V @ (np.eye(3) - P) - np.sign(H)
    assert linalg.max_norm(D) < 1
    assert np.abs(D[np.abs(H) > 1e-6]).max() <= 1e-8
    assert abs(np.sum(A * W) - linalg.one_norm(H)) <= 1e-8
    assert abs(sol.objective_value - linalg.one_norm(H)) <= 1e-8
    assert _support_columns_independent(model, sol.H)


# ---------------------------------------------------------------- 8


@C8
def test_criterion_8_certificate_identities():
    rng = np.random.default_rng(8)
    for i in range(100):
        m, n = int(rng.integers(2, 15)), int(rng.integers(2, 15))
        r = int(rng.integers(1, min(5, m, n) + 1))
        A = gen_instance(GenSpec(m, n, r, seed=800 + i))
        if i % 2:
            res = search.ah_symmetric_ginv(A)
            S, T = res.S, res.T
        else:
            # arbitrary (not locally maximal) nonsingular block
            S, _ = search.init_general(A)
            T = tuple(sorted(rng.choice(n, size=r, replace=False)))
            if abs(np.linalg.det(A[np.ix_(S, T)])) < 1e-8:
                S, T = search.init_general(A)
        cert = verify.ah_certificate(A, S, T)
        assert verify.ah_identity_residual(A, T, cert) <= 1e-8
        Ahat_pinv = linalg.pseudoinverse(A[:, list(T)])
        assert abs(cert.dual_objective - linalg.one_norm(Ahat_pinv)) <= 1e-8 * max(1.0, linalg.one_norm(Ahat_pinv))
        U = cert.U
        assert linalg.max_norm(U + U.T) <= 4 * np.finfo(float).eps * max(1.0, linalg.max_norm(U))


# ---------------------------------------------------------------- 9


@C9
def test_criterion_9_desk_scale_directionality():
    specs = harness.make_specs(40, 20, 10, 5, seed_base=900)
    recs = harness.run_experiment(specs, ["local_search_ah", "lp_p123"], harness.ExperimentConfig(certify=False))
    assert all(r.ok for r in recs), [r.error for r in recs if not r.ok]
    ls = [r for r in recs if r.method == "local_search_ah"]
    lpr = [r for r in recs if r.method == "lp_p123"]
    ls_norm, lp_norm = np.mean([r.one_norm for r in ls]), np.mean([r.one_norm for r in lpr])
    ls_nnz, lp_nnz = np.mean([r.nnz for r in ls]), np.mean([r.nnz for r in lpr])
    assert lp_norm <= ls_norm
    assert ls_nnz <= 400
    assert lp_nnz >= ls_nnz


# ---------------------------------------------------------------- 10


@C10
def test_criterion_10_scalability():
    spec = GenSpec(5000, 500, 50, seed=10)
    A = gen_instance(spec)
    t0 = time.perf_counter()
    res = search.ah_symmetric_ginv(A)
    cert = verify.certificate_for(A, res)
    ratio = verify.certified_ratio(A, res, cert)
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    assert res.nnz <= 5000 * 50
    assert ratio <= 50 * (1 + 1e-9)
