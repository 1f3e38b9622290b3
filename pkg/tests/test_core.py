import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zermelo.core import (
    DomainError,
    Dual,
    NotPositiveDefinite,
    SymMatrix,
    det,
    eval_jet2,
    exp,
    fd_check,
    gradient,
    group_eigenvalues,
    hessian,
    inv,
    jacobian,
    log,
    primal,
    solve,
    solve_sym_geig,
    sqrt,
)


def test_jet2_square():
    jet = eval_jet2(lambda x: x[0] ** 2, np.array([3.0]))
    assert jet.value == 9.0
    np.testing.assert_array_equal(jet.grad, [6.0])
    np.testing.assert_array_equal(jet.hess, [[2.0]])


def test_jet2_constant():
    jet = eval_jet2(lambda x: 4.2 + 0.0 * x[0], np.array([0.3, -1.0]))
    assert jet.value == 4.2
    assert not np.any(jet.grad) and not np.any(jet.hess)


def test_jet2_bilinear():
    jet = eval_jet2(lambda x: x[0] * x[1], np.array([1.0, 2.0]))
    assert jet.value == 2.0
    np.testing.assert_array_equal(jet.grad, [2.0, 1.0])
    np.testing.assert_array_equal(jet.hess, [[0.0, 1.0], [1.0, 0.0]])


def test_hessian_is_symmetric():
    f = lambda x: exp(x[0] * x[1]) * sqrt(1.0 + x[2] ** 2) / (2.0 + x[0])
    H = hessian(f, np.array([0.3, -0.2, 0.7]))
    assert np.array_equal(H, H.T)


def test_nested_duals_do_not_confuse_perturbations():
    # d/dx [x * d/dy (x + y)] = 1; perturbation confusion would give 2
    def outer(x):
        return x[0] * gradient(lambda y: x[0] + y[0], np.array([1.0]))[0]

    np.testing.assert_allclose(gradient(outer, np.array([2.0])), [1.0])


def test_jacobian_shapes():
    val, J = jacobian(lambda x: np.array([x[0] * x[1], x[1], x[0] ** 3]), np.array([2.0, 3.0]))
    assert val.shape == (3,) and J.shape == (3, 2)
    np.testing.assert_allclose(J, [[3.0, 2.0], [0.0, 1.0], [12.0, 0.0]])


def test_domain_errors():
    with pytest.raises(DomainError):
        sqrt(Dual(-1.0, 1.0, 1))
    with pytest.raises(DomainError):
        log(0.0)


def test_fd_check_polynomial():
    f = lambda x: x[0] ** 3 * x[1] - 2.0 * x[1] ** 2 + x[0]
    assert fd_check(f, np.array([0.4, -0.7]), 1e-5).max_error < 1e-8


def test_fd_check_exp_at_zero():
    assert fd_check(lambda x: exp(x[0]), np.array([0.0])).max_error < 1e-7


def test_fd_check_constant():
    assert fd_check(lambda x: 3.0 + 0.0 * x[0], np.array([1.0, 2.0])).max_error < 1e-12


CORPUS = [
    lambda x: x[0] ** 2 + x[1] ** 2,
    lambda x: sqrt(1.0 + x[0] ** 2 + x[1] ** 2),
    lambda x: exp(-x[0]) * x[1] ** 3,
    lambda x: x[0] * x[1] / (1.5 + x[0] ** 2),
    lambda x: log(2.0 + x[0] ** 2) - x[1],
]


@pytest.mark.parametrize("f", CORPUS)
def test_jet_matches_fd_on_random_points(f):
    rng = np.random.default_rng(7)
    for x in rng.uniform(-0.8, 0.8, size=(100, 2)):
        assert fd_check(f, x).max_error < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_product_rule(a, b):
    g = gradient(lambda x: (x[0] + 1.0) * (x[1] - 2.0) * x[0], np.array([a, b]))
    np.testing.assert_allclose(g, [2 * a * (b - 2) + (b - 2), a * (a + 1)], atol=1e-9)


def test_generic_linalg_matches_numpy(rng):
    A = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    b = rng.normal(size=4)
    assert math.isclose(det(A), np.linalg.det(A), rel_tol=1e-12)
    np.testing.assert_allclose(solve(A, b), np.linalg.solve(A, b), rtol=1e-12)
    # object path with duals: derivative of det(A + tI) at t=0 is tr(adj A)
    d = gradient(lambda t: det(A + t[0] * np.eye(4)), np.array([0.0]))[0]
    assert math.isclose(d, np.linalg.det(A) * np.trace(np.linalg.inv(A)), rel_tol=1e-10)
    Ad = np.array([[Dual(v, 0.0, 1) for v in row] for row in A], dtype=object)
    np.testing.assert_allclose([primal(v) for v in inv(Ad).ravel()], np.linalg.inv(A).ravel(), rtol=1e-12)


def test_geig_examples():
    I = np.eye(2)
    np.testing.assert_allclose(solve_sym_geig(I, I).values, [1, 1])
    np.testing.assert_allclose(solve_sym_geig(np.diag([1.0, 2.0]), I).values, [1, 2])
    np.testing.assert_allclose(solve_sym_geig(np.diag([2.0, 2.0]), np.diag([2.0, 1.0])).values, [1, 2])


def test_geig_residual(rng):
    M = rng.normal(size=(5, 5))
    A = M + M.T
    N = rng.normal(size=(5, 5))
    B = N @ N.T + 5 * np.eye(5)
    eig = solve_sym_geig(A, B)
    for lam, v in zip(eig.values, eig.vectors.T):
        assert np.linalg.norm(A @ v - lam * B @ v) < 1e-10 * np.linalg.norm(A)


def test_geig_rejects_indefinite_b():
    with pytest.raises(NotPositiveDefinite) as exc:
        solve_sym_geig(np.eye(2), np.diag([1.0, -0.5]))
    assert "-5.000e-01" in str(exc.value)


def test_symmatrix_and_grouping():
    S = SymMatrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert S.is_positive_definite() and math.isclose(S.min_eigenvalue(), 1.0)
    assert group_eigenvalues([1.0, 1.0 + 1e-9, 2.0]) == [[0, 1], [2]]
