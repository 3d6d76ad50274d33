import math

import numpy as np
import pytest

from conftest import root_kernel, two_cell
from dyadicops import KernelCoeffs, Weight, apply_T, l2_norm, materialize, uniform_kernel, weighted_norm
from dyadicops.spectral import (
    ConvergenceError,
    DenseOperator,
    ResourceError,
    eig_norm,
    power_iteration,
    weighted_matrix,
)
from dyadicops.weights import lognormal_weight


def unit_symbol(depth):
    return KernelCoeffs(depth, tuple(np.full(2**j, 2.0**j) for j in range(depth)),
                        tuple(np.zeros(2**j) for j in range(depth)))


def test_zero_kernel_matrix():
    assert np.all(materialize(KernelCoeffs.zeros(3)).matrix == 0)
    assert l2_norm(materialize(KernelCoeffs.zeros(3))) == 0


def test_matrix_reproduces_application(rng):
    K = uniform_kernel(6, rng)
    M = materialize(K)
    f = rng.standard_normal(64)
    assert np.max(np.abs(M.apply(f) - apply_T(K, f))) <= 1e-12


def test_unit_symbol_T4_is_haar_projection():
    P = materialize(unit_symbol(5), "T4").matrix
    assert np.allclose(P @ P, P, atol=1e-13)
    assert np.allclose(P, P.T, atol=1e-14)
    assert l2_norm(P) == pytest.approx(1.0, rel=1e-10)
    assert eig_norm(P) == pytest.approx(1.0, rel=1e-12)


def test_basic_norms():
    assert l2_norm(np.eye(16)) == pytest.approx(1.0)
    # f -> (mean f) on every cell
    avg = np.full((16, 16), 1 / 16)
    assert l2_norm(avg) == pytest.approx(1.0, rel=1e-12)
    assert l2_norm(np.diag(np.arange(1.0, 9.0))) == pytest.approx(8.0, rel=1e-10)


def test_identity_weighted_is_diagonal(rng):
    depth = 4
    u, vi = lognormal_weight(depth, 1.0, rng), lognormal_weight(depth, 1.0, rng)
    eye = DenseOperator(depth, np.eye(16))
    expected = float(np.max(np.sqrt(u.values * vi.values)))
    assert weighted_norm(eye, vi, u) == pytest.approx(expected, rel=1e-10)


def test_unit_weight_reduces_to_plain_norm(rng):
    K = uniform_kernel(5, rng)
    one = Weight.constant(5)
    assert weighted_norm(K, one, one) == pytest.approx(l2_norm(materialize(K)), rel=1e-12)


def test_root_kernel_weighted_two_routes():
    K = root_kernel(1, 1.0, -1.0)
    w = two_cell(2, 1)
    A = weighted_matrix(materialize(K), w.reciprocal(), w)
    assert weighted_norm(K, w.reciprocal(), w) == pytest.approx(eig_norm(A), rel=1e-9)


def test_duality_and_scaling(rng):
    for _ in range(5):
        K = uniform_kernel(5, rng)
        w = lognormal_weight(5, 0.8, rng)
        direct = weighted_norm(K, w.reciprocal(), w)
        dual = weighted_norm(K, w, w.reciprocal(), which="Tstar")
        assert direct == pytest.approx(dual, rel=1e-8)
        assert weighted_norm(K, w.scaled(3.0).reciprocal(), w.scaled(3.0)) == pytest.approx(direct, rel=1e-8)


@pytest.mark.parametrize("depth", range(1, 9))
def test_power_never_exceeds_eig(depth, rng):
    K = uniform_kernel(depth, rng)
    w = lognormal_weight(depth, 0.7, rng)
    for A in (materialize(K).matrix, weighted_matrix(materialize(K), w.reciprocal(), w)):
        p, e = l2_norm(A), eig_norm(A)
        assert p <= e + 1e-9
        assert p == pytest.approx(e, rel=1e-9)


def test_power_iteration_reports_non_convergence():
    # two nearly equal singular values force slow convergence
    A = np.diag([1.0, 1.0 - 1e-9] + [0.1] * 1022)
    res = power_iteration(A, max_iter=5)
    assert not res.converged and res.iterations == 5
    with pytest.raises(ConvergenceError) as info:
        l2_norm(A, max_iter=5)
    assert info.value.iterations == 5


def test_small_matrices_fall_back_to_eig():
    A = np.diag([1.0, 1.0 - 1e-9, 0.5, 0.1])
    assert l2_norm(A, max_iter=3) == pytest.approx(1.0)


def test_depth_guard():
    with pytest.raises(ResourceError):
        materialize(KernelCoeffs.zeros(5), max_depth=4)


def test_csv_dump(tmp_path, rng):
    M = materialize(uniform_kernel(3, rng))
    M.to_csv(tmp_path / "m.csv")
    assert np.array_equal(np.loadtxt(tmp_path / "m.csv", delimiter=","), M.matrix)


def test_start_vector_not_orthogonal_to_haar():
    # a pure mean-zero operator must still be seen from the fixed start
    P = materialize(unit_symbol(4), "T4").matrix
    res = power_iteration(P)
    assert res.converged and res.value == pytest.approx(1.0, rel=1e-10)
    assert math.isfinite(res.value)
