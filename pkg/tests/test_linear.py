import numpy as np
import pytest

from assignflow.errors import InvalidArgument, RangeError, ResourceLimitError
from assignflow.linear import (
    LinearSystem,
    dominant_mode,
    homogenize,
    laf_operator_apply,
    laf_spectrum_report,
    lift_direction_limit,
    lift_limit,
    predict_lifted_limit,
    propagate,
)
from assignflow.weights import WeightMatrix

from conftest import random_state, random_symmetric_form, random_weights


def tangent(rng, m, n):
    X = rng.standard_normal((m, n))
    return (X - X.mean(axis=1, keepdims=True)).ravel()


def rk4_oracle(A, V0, t, steps):
    h = t / steps
    V = V0.copy()
    for _ in range(steps):
        k1 = A @ V
        k2 = A @ (V + h / 2 * k1)
        k3 = A @ (V + h / 2 * k2)
        k4 = A @ (V + h * k3)
        V = V + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return V


def test_operator_matches_dense(rng):
    for _ in range(5):
        m, n = rng.integers(2, 8), rng.integers(2, 6)
        sys_ = LinearSystem(random_state(rng, m, n), random_weights(rng, m, density=0.5))
        V = rng.standard_normal(m * n)
        assert np.abs(laf_operator_apply(sys_, V) - sys_.dense() @ V).max() < 1e-12


def test_operator_kills_constant_blocks(rng):
    sys_ = LinearSystem(random_state(rng, 3, 4), random_weights(rng, 3))
    V = np.kron(rng.standard_normal(3), np.ones(4))
    assert np.abs(laf_operator_apply(sys_, V)).max() < 1e-12


def test_operator_identity_weights(rng):
    sys_ = LinearSystem(np.full((2, 3), 1 / 3), np.eye(2))
    V = rng.standard_normal(6)
    R = np.eye(3) / 3 - 1 / 9
    assert np.allclose(laf_operator_apply(sys_, V), np.kron(np.eye(2), R) @ V, atol=1e-15)


def test_operator_tangency_and_errors(rng):
    sys_ = LinearSystem(random_state(rng, 4, 3), random_weights(rng, 4))
    out = laf_operator_apply(sys_, rng.standard_normal(12)).reshape(4, 3)
    assert np.abs(out.sum(axis=1)).max() < 1e-12
    with pytest.raises(InvalidArgument):
        laf_operator_apply(sys_, np.zeros(5))
    with pytest.raises(InvalidArgument):
        LinearSystem(random_state(rng, 4, 3), random_weights(rng, 4), b=np.ones((4, 3)))
    with pytest.raises(ResourceLimitError):
        LinearSystem(np.full((100, 50), 0.02), np.eye(100)).dense()


def test_two_by_two_spectra():
    Sh = np.full((2, 2), 0.5)
    # A = Omega kron R with sigma(R) = {0, 1/2}, so sigma(A) = sigma(Omega) / 2 plus zeros
    Om = 0.5 * np.array([[1, 1], [-1, 1]])
    lam = np.sort_complex(laf_spectrum_report(LinearSystem(Sh, Om))["eigenvalues"])
    assert np.allclose(lam, np.sort_complex([0, 0, 0.25 - 0.25j, 0.25 + 0.25j]), atol=1e-10)
    assert np.allclose(lam, np.sort_complex(np.kron(np.linalg.eigvals(Om), [0.0, 0.5])), atol=1e-10)
    lam = np.sort_complex(laf_spectrum_report(LinearSystem(Sh, 0.5 * np.array([[-1, 1], [1, -1]])))["eigenvalues"])
    assert np.allclose(lam, [-0.5, 0, 0, 0], atol=1e-10)


def test_spectrum_report_checks(rng):
    for _ in range(20):
        m, n = rng.integers(2, 6), rng.integers(2, 5)
        rep = laf_spectrum_report(LinearSystem(random_state(rng, m, n), random_symmetric_form(rng, m)))
        assert np.abs(rep["eigenvalues"].imag).max() < 1e-8
        assert all(rep["checks"].values())
    # symmetric positive definite weights: inertia m(n-1) positive, m zero
    H = rng.uniform(0, 0.2, (4, 4))
    H = H + H.T + 2 * np.eye(4)
    rep = laf_spectrum_report(LinearSystem(random_state(rng, 4, 3), H))
    assert rep["positivity_class"] == "positive"
    assert rep["nullspace_dim"] == 4 and rep["rank"] == 8
    assert np.sum(rep["eigenvalues"].real > 1e-9) == 8
    assert rep["checks"]["nonzero_positive"] and rep["checks"]["rank_is_m(n-1)"]


def test_trace_positive(rng):
    sys_ = LinearSystem(random_state(rng, 5, 3), random_weights(rng, 5, row_stochastic=False))
    assert np.trace(sys_.dense()) > 0
    assert laf_spectrum_report(sys_)["checks"]["some_positive_real_part"]


def test_propagate_methods_agree(rng):
    for _ in range(3):
        m, n = rng.integers(2, 5), rng.integers(2, 5)
        sys_ = LinearSystem(random_state(rng, m, n), random_weights(rng, m))
        V0 = tangent(rng, m, n)
        a = propagate(sys_, V0, 1.0, method="eigen")
        b = propagate(sys_, V0, 1.0, method="rk4")
        assert np.abs(a - b).max() <= 1e-6 * max(1.0, np.abs(a).max())
        assert np.allclose(propagate(sys_, V0, 0.0), V0)


def test_propagate_nullspace_constant(rng):
    sys_ = LinearSystem(random_state(rng, 3, 3), random_weights(rng, 3))
    V0 = np.kron(rng.standard_normal(3), np.ones(3))
    assert np.allclose(propagate(sys_, V0, 3.0), V0, atol=1e-10)


def test_homogenize_duhamel(rng):
    Sh, Om = random_state(rng, 3, 3), random_weights(rng, 3)
    A = LinearSystem(Sh, Om).dense()
    x = tangent(rng, 3, 3)
    b = (A @ x).reshape(3, 3)
    sys_ = LinearSystem(Sh, Om, b=b)
    V0 = tangent(rng, 3, 3)
    hom, V0h, shift = homogenize(sys_, V0)
    assert hom.homogeneous
    # oracle: integrate V' = AV + b directly
    direct = rk4_oracle(np.block([[A, b.reshape(-1, 1)], [np.zeros((1, 10))]]), np.append(V0, 1.0), 1.0, 2000)[:9]
    assert np.abs(propagate(sys_, V0, 1.0) - direct).max() < 1e-8
    assert np.allclose(A @ -shift, b.ravel(), atol=1e-10)


def test_homogenize_identity_and_range_error(rng):
    sys_ = LinearSystem(random_state(rng, 2, 3), random_weights(rng, 2))
    V0 = tangent(rng, 2, 3)
    hom, V0h, shift = homogenize(sys_, V0)
    assert np.array_equal(V0h, V0) and not shift.any()
    # with invertible Omega, range(A) misses the constant blocks; a tangent b can still
    # leave range(A) when A has a nontrivial tangent kernel
    Sh = np.full((2, 2), 0.5)
    sing = LinearSystem(Sh, WeightMatrix(np.array([[1.0, 1.0], [1.0, 1.0]])), b=np.array([[1.0, -1.0], [-1.0, 1.0]]))
    with pytest.raises(RangeError):
        homogenize(sing)


def test_lift_limit_examples():
    lim, ties = lift_direction_limit([[3.0, 1.0, 0.0]], [[0.2, 0.3, 0.5]])
    assert np.array_equal(lim, [[1.0, 0.0, 0.0]]) and not ties[0]
    lim, ties = lift_direction_limit([[1.0, 1.0, 0.0]], [[0.2, 0.3, 0.5]])
    assert np.allclose(lim, [[0.4, 0.6, 0.0]]) and ties[0]
    W0 = np.array([[0.2, 0.3, 0.5]])
    lim, _ = lift_limit(np.array([[0.6, 0.3, 0.0]]), W0)
    assert np.array_equal(lim, [[1.0, 0.0, 0.0]])


def test_dominant_mode_matches_eig(rng):
    for _ in range(5):
        sys_ = LinearSystem(random_state(rng, 3, 3), random_symmetric_form(rng, 3))
        mode = dominant_mode(sys_, tangent(rng, 3, 3))
        lam = np.linalg.eigvals(sys_.dense())
        assert np.isclose(mode.eigenvalue, lam.real.max(), atol=1e-8)
        assert np.allclose(sys_.dense() @ mode.vector, mode.eigenvalue * mode.vector, atol=1e-7)


def test_predict_indeterminate_for_zero_start(rng):
    sys_ = LinearSystem(random_state(rng, 3, 3), random_symmetric_form(rng, 3))
    lim, info = predict_lifted_limit(sys_, np.zeros(9))
    assert lim is None and info["reason"] == "indeterminate"
