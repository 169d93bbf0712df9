import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbell import qmath
from wbell.qmath import I2, SIGMA_X, SIGMA_Z
from wbell.scenario import make_w_state

SQ2 = math.sqrt(2.0)


def test_kron_zz_is_diagonal():
    np.testing.assert_array_equal(qmath.kron(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))


def test_kron_identity():
    np.testing.assert_array_equal(qmath.kron(I2, I2), np.eye(4))


def test_kron_xx_keeps_plus_plus():
    plus = np.array([1, 1]) / SQ2
    pp = qmath.kron(plus, plus)
    np.testing.assert_allclose(qmath.kron(SIGMA_X, SIGMA_X) @ pp, pp, atol=1e-15)


def test_kron_matches_numpy():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    b = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    np.testing.assert_allclose(qmath.kron(a, b), np.kron(a, b), atol=1e-15)


def test_kron_rejects_mixed_ranks():
    with pytest.raises(ValueError):
        qmath.kron(np.ones(2), np.eye(2))


def test_expectation_w_xzx():
    # Hand expansion: X(x)Z(x)X maps |+--> to -|--+> and |--+> to -|+-->.
    assert qmath.expectation(make_w_state(), qmath.kron(SIGMA_X, SIGMA_Z, SIGMA_X)) == pytest.approx(-2 / 3, abs=1e-14)


@pytest.mark.parametrize("placement", [(SIGMA_Z, SIGMA_X, SIGMA_X), (SIGMA_X, SIGMA_X, SIGMA_Z)])
def test_expectation_w_other_placements(placement):
    assert qmath.expectation(make_w_state(), qmath.kron(*placement)) == pytest.approx(-2 / 3, abs=1e-14)


def test_expectation_eigenstate_and_normalization():
    assert qmath.expectation(np.array([1, 0]), SIGMA_Z) == pytest.approx(1.0)
    assert qmath.expectation(make_w_state(), np.eye(8)) == pytest.approx(1.0, abs=1e-14)


def test_expectation_density_matrix():
    rho = np.diag([0.25, 0.75]).astype(complex)
    assert qmath.expectation(rho, SIGMA_Z) == pytest.approx(-0.5)


def test_expectation_errors():
    with pytest.raises(ValueError, match="dimension"):
        qmath.expectation(np.array([1, 0]), np.eye(4))
    with pytest.raises(ValueError, match="Hermitian"):
        qmath.expectation(np.array([1, 0]), np.array([[0, 1], [0, 0]]))


def test_eigenvalues_pauli():
    np.testing.assert_allclose(qmath.hermitian_eigenvalues(SIGMA_X), [-1, 1], atol=1e-12)


def test_eigenvalues_diagonal():
    np.testing.assert_allclose(qmath.hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3], atol=1e-12)


def test_eigenvalues_canonical_bell_operator():
    # B = sqrt2 (Z(x)X - X(x)Z); B^2 = 4(I - Y(x)Y) has eigenvalues {0, 8}.
    B = SQ2 * (qmath.kron(SIGMA_Z, SIGMA_X) - qmath.kron(SIGMA_X, SIGMA_Z))
    vals = qmath.hermitian_eigenvalues(B)
    np.testing.assert_allclose(vals, [-2 * SQ2, 0, 0, 2 * SQ2], atol=1e-10)


def test_eigenvalues_reject_non_hermitian():
    with pytest.raises(ValueError):
        qmath.hermitian_eigenvalues(np.array([[0, 1], [2, 0]]))


def test_eigenvalues_dimension_cap():
    with pytest.raises(ValueError):
        qmath.hermitian_eigenvalues(np.eye(16))


def test_jacobi_reports_cap():
    m = np.array([[0, 1], [1, 0]], dtype=complex)
    with pytest.raises(qmath.ConvergenceError, match="0 sweeps"):
        qmath.jacobi_eigh(m, max_sweeps=0)


def _random_hermitian(seed, n):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m + m.conj().T


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_jacobi_matches_lapack(seed, n):
    m = _random_hermitian(seed, n)
    vals, vecs = qmath.jacobi_eigh(m)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(m), atol=1e-10)
    np.testing.assert_allclose(m @ vecs, vecs * vals, atol=1e-10)
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(n), atol=1e-12)


pm_obs = st.sampled_from([SIGMA_X, SIGMA_Z, -SIGMA_X, -SIGMA_Z, I2])


@given(pm_obs, pm_obs, pm_obs)
def test_kron_associative(a, b, c):
    np.testing.assert_allclose(qmath.kron(qmath.kron(a, b), c), qmath.kron(a, qmath.kron(b, c)), atol=1e-15)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]))
def test_trace_equals_eigenvalue_sum(seed, n):
    m = _random_hermitian(seed, n)
    assert qmath.hermitian_eigenvalues(m).sum() == pytest.approx(np.trace(m).real, abs=1e-10)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]))
def test_expectation_within_spectrum(seed, n):
    m = _random_hermitian(seed, n)
    rng = np.random.default_rng(seed + 1)
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    vals = qmath.hermitian_eigenvalues(m)
    e = qmath.expectation(psi, m)
    assert vals[0] - 1e-10 <= e <= vals[-1] + 1e-10
