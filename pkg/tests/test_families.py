from itertools import combinations

import numpy as np
import pytest
import sympy as sp

from sparseginv import blocks, families, linalg, lp, verify
from sparseginv.errors import InvalidParams


def test_sym_3x3():
    f = families.sym_3x3()
    assert f.exact_A * f.exact_A == 9 * f.exact_A
    assert f.known_values["opt_onenorm"] == pytest.approx(34 / 81)
    rep = verify.check_properties(f.A, f.known_H)
    assert rep.holds("p1") and rep.holds("p2") and np.array_equal(f.known_H, f.known_H.T)
    norms = [blocks.symmetric_block(f.A, S).one_norm for S in combinations(range(3), 2)]
    assert norms == pytest.approx(f.known_values["block_norms"])


def test_ah_3x3():
    f = families.ah_3x3()
    rep = verify.check_properties(f.A, f.known_H)
    assert rep.holds("p1") and rep.holds("p2") and rep.holds("p3") and rep.reflexive
    assert linalg.one_norm(f.known_H) == pytest.approx(9 / 8)
    norms = [blocks.column_block(f.A, T).one_norm for T in combinations(range(3), 2)]
    assert sorted(norms) == pytest.approx(sorted(f.known_values["block_norms"]))
    # third column is 2*(a1 + a2)
    assert f.exact_A[:, 2] == 2 * (f.exact_A[:, 0] + f.exact_A[:, 1])


def test_toeplitz_examples():
    assert families.toeplitz_family(4, 0.01, 0.01).known_values["block_norm"] == pytest.approx(16.2)
    f = families.toeplitz_family(4, 0.01, 0.0, "ah")
    assert f.known_values["swap_b_norm"] == pytest.approx(4.1)
    f = families.toeplitz_family(4, 1e-6, 0.0, "general")
    assert f.known_values["ratio"] == pytest.approx(16, rel=1e-4)
    assert f.known_values["swap_cb_norm"] == pytest.approx(1 + 60 / 3 * 1e-6)


@pytest.mark.parametrize("r", [3, 4, 5])
@pytest.mark.parametrize("case,dL,dU", [("general", 1e-3, 0.0), ("general", 1e-3, 2e-3), ("symmetric", 1e-3, 1e-3), ("ah", 1e-3, 0.0)])
def test_toeplitz_recomputed(r, case, dL, dU):
    f = families.toeplitz_family(r, dL, dU, case)
    kv = f.known_values
    A = f.A
    assert linalg.numerical_rank(A) == r
    At = A[:r, :r]
    N = np.linalg.inv(At)
    assert linalg.numerical_rank(N) == r
    assert linalg.one_norm(N) == pytest.approx(kv["block_norm"], rel=1e-8)
    assert kv["block_norm"] == pytest.approx(r * r + (r**3 - r) / 6 * (dL + dU), rel=1e-12)
    # Sherman-Morrison: replacing column 1 of Atil by b
    Ab = At.copy()
    Ab[:, 0] = A[:r, r]
    e1 = np.eye(r)[:, 0]
    sm = N - np.outer(np.ones(r) - e1, e1) @ N
    assert np.allclose(np.linalg.inv(Ab), sm, atol=1e-10)
    assert linalg.one_norm(sm) == pytest.approx(kv["swap_b_norm"], rel=1e-8)
    if "swap_b_norm_formula" in kv:
        assert kv["swap_b_norm"] == pytest.approx(kv["swap_b_norm_formula"], rel=1e-12)
    if case != "ah":
        rows = [r] + list(range(1, r))
        cols = [r] + list(range(1, r))
        assert linalg.one_norm(np.linalg.inv(A[np.ix_(rows, cols)])) == pytest.approx(kv["swap_cb_norm"], rel=1e-8)
    if "swap_cb_norm_formula" in kv:
        assert kv["swap_cb_norm"] == pytest.approx(kv["swap_cb_norm_formula"], rel=1e-12)
    assert kv["det_block_inverse"] == pytest.approx(kv["det_block_inverse_formula"], rel=1e-12)


def test_toeplitz_params():
    with pytest.raises(InvalidParams):
        families.toeplitz_family(2)
    with pytest.raises(InvalidParams):
        families.toeplitz_family(3, 0.0, 0.0)
    with pytest.raises(InvalidParams):
        families.toeplitz_family(3, 1e-3, 2e-3, "symmetric")
    with pytest.raises(InvalidParams):
        families.toeplitz_family(3, case="other")
    assert families.toeplitz_family(3, pad=2).A.shape == (6, 6)


def test_no_const_rank2():
    f = families.no_const_rank2(10)
    A = f.A
    assert linalg.one_norm(np.linalg.inv(A[:, [0, 1]])) == pytest.approx(2)
    assert linalg.one_norm(np.linalg.inv(A[:, [2, 3]])) == pytest.approx(0.2)
    for T in ([0, 2], [0, 3], [2, 1], [3, 1]):
        assert linalg.one_norm(np.linalg.inv(A[:, T])) == pytest.approx(f.known_values["neighbor_norm"])
    with pytest.raises(InvalidParams):
        families.no_const_rank2(0)


def test_no_const_general():
    f = families.no_const_general(3, 5)
    assert linalg.one_norm(np.linalg.inv(f.A[:, 3:])) == pytest.approx(3 / 5)
    assert f.known_values["det_atil"] == f.known_values["det_atil_formula"] == 4  # (-2)**2 * (3 - 2)
    f = families.no_const_general(3, 2)
    for p in range(3):
        for j in range(3, 6):
            T = [0, 1, 2]
            T[p] = j
            assert linalg.one_norm(np.linalg.inv(f.A[:, T])) == pytest.approx(f.known_values["neighbor_norm"])
    with pytest.raises(InvalidParams):
        families.no_const_general(2, 1)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_tight_ratio(r):
    f = families.tight_ratio_r_plus_1(r)
    assert f.A.shape == (r, r + 1)
    assert f.known_values["expected_ratio"] == pytest.approx(2 * r / (r + 1))
    Ahat = f.A[:, :r]
    assert np.allclose(Ahat, Ahat.T) and np.linalg.eigvalsh(Ahat).min() > 0
    assert lp.solve_model(f.A, "P1").objective_value == pytest.approx(f.known_values["opt_onenorm"], rel=1e-9)


@pytest.mark.parametrize("r", [3, 4, 5])
def test_p1sym_sharp(r):
    f = families.p1sym_sharp(r)
    A, H, W = f.A, f.known_H, f.known_W
    assert np.allclose(A, A.T) and linalg.numerical_rank(A) == r
    assert linalg.nnz(H) == r * r + r and linalg.one_norm(H) == pytest.approx(r * r + r)
    assert linalg.max_norm(A @ H @ A - A) <= 1e-8
    assert linalg.max_norm(A @ W @ A) <= 1 + 1e-12
    assert np.sum(A * W) == pytest.approx(r * r + r)
    assert np.abs(np.array(f.known_values["XtY"])).max() <= 1
    with pytest.raises(InvalidParams):
        families.p1sym_sharp(2)


@pytest.mark.parametrize("m,r", [(m, r) for r in (2, 3) for m in range(r + 1, 7)])
def test_p123_sharp(m, r):
    f = families.p123_sharp(m, r)
    A, H, W, V = f.A, f.known_H, f.known_W, f.known_V
    assert A.shape == (m, r * r) and linalg.numerical_rank(A) == r
    P = A @ np.linalg.pinv(A)
    assert linalg.max_norm(A @ H @ A - A) <= 1e-8
    assert linalg.max_norm(H @ (np.eye(m) - P)) <= 1e-8
    rep = verify.check_properties(A, H)
    assert rep.holds("p2") and rep.holds("p3")
    assert linalg.nnz(H) == r * r + r * r * (m - r)
    D = A.T @ W @ A.T + V @ (np.eye(m) - P) - np.sign(H)
    assert linalg.max_norm(D) < 1
    assert np.all(np.abs(D[np.abs(H) > 1e-9]) <= 1e-8)
    assert np.sum(A * W) == pytest.approx(linalg.one_norm(H), rel=1e-8)


def test_p123_sharp_params():
    with pytest.raises(InvalidParams):
        families.p123_sharp(2, 2)
    with pytest.raises(InvalidParams):
        families.p123_sharp(3, 1)


def test_sym_embedding(rng):
    E = families.sym_embedding(np.eye(2))
    assert np.array_equal(E, np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]))
    assert linalg.numerical_rank(E) == 4
    A = rng.standard_normal((3, 4))
    E = families.sym_embedding(A)
    assert np.array_equal(E, E.T)
    from sparseginv.search import sym_reflexive_ginv

    Hbar = sym_reflexive_ginv(E).H
    Z = Hbar[3:, :3]
    assert linalg.max_norm(A @ Z @ A - A) <= 1e-8


def test_registry():
    assert set(families.FAMILIES) >= {"sym_3x3", "toeplitz", "p123_sharp"}
    assert families.get_family("no_const_rank2", k=4).params["k"] == 4
    with pytest.raises(InvalidParams):
        families.get_family("nope")


def test_exact_arithmetic():
    f = families.toeplitz_family(3, 1e-3, 0.0)
    assert all(isinstance(x, sp.Rational) for x in f.exact_A)
