import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_T, root_kernel
from dyadicops import (
    ROOT,
    CellVector,
    DomainError,
    DyadicInterval,
    DyadicTree,
    KernelCoeffs,
    apply_component,
    apply_T,
    apply_Tstar,
    decay_kernel,
    decomposition_residual,
    haar_function,
    haar_transform,
    t1_coefficients,
    testing_value,
    uniform_kernel,
)
from dyadicops.kernel import direct_t1_coefficients, direct_testing_values, testing_values
from dyadicops.spectral import materialize


def test_zero_kernel_is_zero(rng):
    K = KernelCoeffs.zeros(4)
    f = rng.standard_normal(16)
    assert np.all(apply_T(K, f) == 0) and np.all(apply_Tstar(K, f) == 0)
    assert decomposition_residual(K, f) == 0
    assert all(np.all(t == 0) for t in testing_values(K))


def test_root_kernel_example():
    K = root_kernel(1, 1.0, -1.0)
    one = CellVector.constant(1, 1.0)
    Tf = apply_T(K, one)
    assert np.allclose(Tf.values, [0.5, -0.5])
    assert np.allclose(Tf.values, 0.5 * haar_function(1, ROOT).values)
    assert decomposition_residual(K, one) < 1e-15
    c = t1_coefficients(K).at(ROOT)
    assert c["alpha"] == 0 and c["beta"] == 2 and c["t1"] == 0.5
    assert testing_value(K, ROOT) == 0
    assert testing_value(K, ROOT, verify=True) == pytest.approx(0, abs=1e-15)


def test_symmetric_root_testing_example():
    K = root_kernel(1, 1.0, 1.0)
    assert testing_value(K, ROOT) == -0.5
    assert testing_value(K, ROOT, verify=True) == pytest.approx(-0.5, abs=1e-15)
    h = haar_function(1, ROOT)
    assert np.allclose(apply_T(K, h).values, -0.5 * h.values)


@pytest.mark.parametrize("depth", [1, 2, 3, 5, 7])
def test_fast_apply_matches_dense_oracle(depth, rng):
    K = uniform_kernel(depth, rng)
    M = dense_T(K)
    f = rng.standard_normal(2**depth)
    assert np.max(np.abs(apply_T(K, f) - M @ f)) <= 1e-12
    assert np.max(np.abs(apply_Tstar(K, f) - M.T @ f)) <= 1e-12


@pytest.mark.parametrize("depth", range(1, 9))
def test_adjoint_is_transpose(depth, rng):
    K = uniform_kernel(depth, rng)
    assert np.max(np.abs(materialize(K, "Tstar").matrix - materialize(K).matrix.T)) <= 1e-12


def test_symmetric_kernel_self_adjoint(rng):
    K0 = uniform_kernel(6, rng)
    K = KernelCoeffs(6, K0.kplus, K0.kplus)
    f = rng.standard_normal(64)
    assert np.allclose(apply_T(K, f), apply_Tstar(K, f), atol=1e-13)
    c = t1_coefficients(K)
    assert all(np.all(b == 0) for b in c.beta)
    assert all(np.allclose(a, b) for a, b in zip(c.t1_coeff, c.t1star_coeff))


def test_four_pieces_recover_T(rng):
    for depth in range(1, 10):
        K = uniform_kernel(depth, rng)
        f = rng.standard_normal(2**depth)
        assert decomposition_residual(K, f) <= 1e-10


def test_T2_is_adjoint_of_T3(rng):
    K = uniform_kernel(7, rng)
    f, g = rng.standard_normal((2, 128))
    lhs = np.dot(apply_component(K, "T2", f), g)
    rhs = np.dot(f, apply_component(K, "T3", g))
    assert lhs == pytest.approx(rhs, abs=1e-12 * 128)


def test_T3_on_one_is_paraproduct_symbol(rng):
    depth = 5
    K = uniform_kernel(depth, rng)
    T3one = CellVector(depth, apply_component(K, "T3", np.ones(32)))
    coeffs = haar_transform(T3one).coeffs
    for I in DyadicTree(depth).internal():
        kp, km = K.entry(I)
        assert coeffs[I] == pytest.approx((kp - km) * I.length**1.5, abs=1e-12)


def test_T4_unit_symbol_is_identity_on_haar():
    depth = 4
    # (K+ + K-)|I| = 1 on every interval
    K = KernelCoeffs(depth, tuple(np.full(2**j, 2.0**j) for j in range(depth)),
                     tuple(np.zeros(2**j) for j in range(depth)))
    for J in DyadicTree(depth).internal():
        h = haar_function(depth, J)
        assert np.allclose(apply_component(K, "T4", h).values, h.values, atol=1e-13)


@pytest.mark.parametrize("depth", [1, 3, 6, 9])
def test_t1_closed_form_vs_direct(depth, rng):
    K = uniform_kernel(depth, rng)
    c = t1_coefficients(K)
    d1, d1s = direct_t1_coefficients(K)
    assert max(np.max(np.abs(a - b)) for a, b in zip(c.t1_coeff, d1)) <= 1e-10
    assert max(np.max(np.abs(a - b)) for a, b in zip(c.t1star_coeff, d1s)) <= 1e-10


def test_testing_closed_form_vs_single_interval(rng):
    depth = 5
    K = uniform_kernel(depth, rng)
    for J in DyadicTree(depth).internal():
        assert testing_value(K, J) == pytest.approx(testing_value(K, J, verify=True), abs=1e-12)
    closed, direct = testing_values(K), direct_testing_values(K)
    assert max(np.max(np.abs(a - b)) for a, b in zip(closed, direct)) <= 1e-12


def test_support_locality(rng):
    depth = 6
    K = uniform_kernel(depth, rng)
    J = DyadicInterval(3, 5)
    f = np.zeros(64)
    f[J.cell_slice(depth)] = rng.standard_normal(8)
    mass = f.sum() / 64
    Tf = apply_T(K, f)
    # off J only the ancestors of J act, each constant on the sibling half
    for j in range(J.level):
        A = DyadicInterval(j, J.index >> (J.level - j))
        kp, km = K.entry(A)
        if A.left.contains(J):
            assert np.allclose(Tf[A.right.cell_slice(depth)], km * mass, atol=1e-13)
        else:
            assert np.allclose(Tf[A.left.cell_slice(depth)], kp * mass, atol=1e-13)
    # on J the ancestors see zero mass on the far half
    K_local = KernelCoeffs(depth, tuple(x * (j >= J.level) for j, x in enumerate(K.kplus)),
                           tuple(x * (j >= J.level) for j, x in enumerate(K.kminus)))
    assert np.allclose(Tf[J.cell_slice(depth)], apply_T(K_local, f)[J.cell_slice(depth)], atol=1e-13)


def test_decay_kernel_is_extremal(rng):
    K = decay_kernel(5, rng, 0.8)
    for I, kp, km in ((I, *K.entry(I)) for I in DyadicTree(5).internal()):
        assert abs(kp) * I.length == pytest.approx(0.8)
        assert abs(km) * I.length == pytest.approx(0.8)
    assert K.size_violations() == []


def test_size_validation():
    bad = root_kernel(2, 1.5, 0.0)
    with pytest.raises(DomainError):
        bad.validate()
    assert bad.validate(allow_unnormalized=True) is bad
    with pytest.raises(DomainError):
        decay_kernel(3, np.random.default_rng(0), 2.0)


def test_kernel_file_round_trip(tmp_path, rng):
    K = uniform_kernel(4, rng)
    path = tmp_path / "k.json"
    K.save(path)
    data = json.loads(path.read_text())
    assert data["depth"] == 4 and len(data["entries"]) == 15
    L = KernelCoeffs.load(path)
    assert all(np.array_equal(a, b) for a, b in zip(K.kplus, L.kplus))
    assert all(np.array_equal(a, b) for a, b in zip(K.kminus, L.kminus))


def test_kernel_file_rejects_bad_entries(tmp_path):
    path = tmp_path / "k.json"
    path.write_text(json.dumps({"depth": 1, "entries": [{"level": 0, "index": 0, "kplus": 3.0, "kminus": 0.0}]}))
    with pytest.raises(DomainError):
        KernelCoeffs.load(path)
    KernelCoeffs.load(path, allow_unnormalized=True)
    path.write_text(json.dumps({"depth": 1, "entries": [{"level": 1, "index": 0, "kplus": 0.0, "kminus": 0.0}]}))
    with pytest.raises(DomainError):
        KernelCoeffs.load(path)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_property_adjoint_pairing(depth, seed):
    r = np.random.default_rng(seed)
    K = uniform_kernel(depth, r)
    f, g = r.standard_normal((2, 2**depth))
    assert np.dot(apply_T(K, f), g) == pytest.approx(np.dot(f, apply_Tstar(K, g)), abs=1e-11 * 2**depth)
    assert decomposition_residual(K, f) <= 1e-10
